#pragma once

#include <chrono>

namespace mqfb {

// Wall-clock seconds per pipeline stage.
struct StageTimes {
  double knn = 0.0;
  double laplacian = 0.0;
  double partition = 0.0;
  double filtering = 0.0;  // sparse products and spectral multiplies
  double solve = 0.0;      // factorization and triangular/CG solves

  double sum() const { return knn + laplacian + partition + filtering + solve; }

  StageTimes& operator+=(const StageTimes& o) {
    knn += o.knn;
    laplacian += o.laplacian;
    partition += o.partition;
    filtering += o.filtering;
    solve += o.solve;
    return *this;
  }
};

// Adds the elapsed time to `slot` on destruction; no-op for a null slot.
class ScopedTimer {
 public:
  explicit ScopedTimer(double* slot) : slot_(slot), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    if (slot_) {
      *slot_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  double* slot_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace mqfb
