#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynmis/tensor.hpp"

namespace dynmis::neural {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first;   // moment estimates, one per parameter
  std::vector<Tensor> second;
  std::uint64_t step = 0;
};

/// Bias-corrected Adam update. Moments are allocated on the first call;
/// throws DimensionMismatch if shapes disagree with params or earlier calls.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& st);

}  // namespace dynmis::neural
