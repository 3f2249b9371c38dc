#pragma once

#include <functional>
#include <string>
#include <vector>

namespace mqfb {

// Scalar spectral response on [0, 2]. Either a polynomial (coefficients in
// ascending degree) or a named closed form shipped with the library.
class FilterKernel {
 public:
  enum class Form { polynomial, closed_form };

  FilterKernel() : coefficients_{1.0}, name_("polynomial") {}

  static FilterKernel polynomial(std::vector<double> coefficients);
  static FilterKernel closed_form(std::string name, std::function<double(double)> fn);

  double operator()(double lambda) const;

  Form form() const noexcept { return form_; }
  bool is_polynomial() const noexcept { return form_ == Form::polynomial; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  const std::string& name() const noexcept { return name_; }

 private:
  Form form_ = Form::polynomial;
  std::vector<double> coefficients_;
  std::string name_;
  std::function<double(double)> fn_;
};

}  // namespace mqfb
