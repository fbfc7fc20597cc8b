#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dynmis::neural {

using Vec = std::vector<double>;

/// Dense row-major float64 storage with an explicit shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::initializer_list<std::size_t> shape) : Tensor(std::vector<std::size_t>(shape)) {}

  static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
  static Tensor vector(std::size_t n) { return Tensor({n}); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const noexcept { return shape_.size() < 2 ? 1 : shape_[1]; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }

  void fill(double value);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// y = W x
void matvec(const Tensor& w, std::span<const double> x, std::span<double> y);
// y += W x
void matvec_add(const Tensor& w, std::span<const double> x, std::span<double> y);
// x_grad += W^T dy
void matvec_t_add(const Tensor& w, std::span<const double> dy, std::span<double> x_grad);
// W_grad += dy x^T
void outer_add(Tensor& w_grad, std::span<const double> dy, std::span<const double> x);

void add_into(std::span<double> acc, std::span<const double> x);

}  // namespace dynmis::neural
