#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace dynmis::neural {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares `analytic` against central differences of `loss` over each entry
/// of `values` (perturbed in place and restored). The relative error of an
/// entry is |a - f| / max(|a|, |f|, floor), so gradients far below `floor`
/// are compared on an absolute scale.
GradCheckResult check_gradient(const std::function<double()>& loss, std::span<double> values,
                               std::span<const double> analytic, double step = 1e-5,
                               double floor = 1e-4);

}  // namespace dynmis::neural
