#include "mqfb/kernel.hpp"

#include <string>

#include "mqfb/error.hpp"

namespace mqfb {

FilterKernel FilterKernel::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) {
    throw Error(ErrorCode::invalid_argument, "polynomial kernel needs at least one coefficient");
  }
  FilterKernel k;
  k.form_ = Form::polynomial;
  k.coefficients_ = std::move(coefficients);
  k.name_ = "polynomial";
  return k;
}

FilterKernel FilterKernel::closed_form(std::string name, std::function<double(double)> fn) {
  if (!fn) throw Error(ErrorCode::invalid_argument, "closed-form kernel '" + name + "' is empty");
  FilterKernel k;
  k.form_ = Form::closed_form;
  k.coefficients_.clear();
  k.name_ = std::move(name);
  k.fn_ = std::move(fn);
  return k;
}

double FilterKernel::operator()(double lambda) const {
  if (form_ == Form::closed_form) return fn_(lambda);
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * lambda + *it;
  return acc;
}

}  // namespace mqfb
