#include "dynmis/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace dynmis::neural {

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)),
      values_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>()), 0.0) {}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

void matvec(const Tensor& w, std::span<const double> x, std::span<double> y) {
  std::fill(y.begin(), y.end(), 0.0);
  matvec_add(w, x, y);
}

void matvec_add(const Tensor& w, std::span<const double> x, std::span<double> y) {
  const std::size_t cols = w.cols();
  const double* a = w.values().data();
  for (std::size_t r = 0; r < w.rows(); ++r, a += cols) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += a[c] * x[c];
    y[r] += acc;
  }
}

void matvec_t_add(const Tensor& w, std::span<const double> dy, std::span<double> x_grad) {
  const std::size_t cols = w.cols();
  const double* a = w.values().data();
  for (std::size_t r = 0; r < w.rows(); ++r, a += cols) {
    const double g = dy[r];
    if (g == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) x_grad[c] += a[c] * g;
  }
}

void outer_add(Tensor& w_grad, std::span<const double> dy, std::span<const double> x) {
  const std::size_t cols = w_grad.cols();
  double* a = w_grad.values().data();
  for (std::size_t r = 0; r < w_grad.rows(); ++r, a += cols) {
    const double g = dy[r];
    if (g == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) a[c] += g * x[c];
  }
}

void add_into(std::span<double> acc, std::span<const double> x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

}  // namespace dynmis::neural
