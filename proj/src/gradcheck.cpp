#include "dynmis/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace dynmis::neural {

GradCheckResult check_gradient(const std::function<double()>& loss, std::span<double> values,
                               std::span<const double> analytic, double step, double floor) {
  GradCheckResult out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = loss();
    values[i] = saved - step;
    const double down = loss();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    const double err = std::abs(numeric - analytic[i]) / scale;
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst_index = i;
    }
    ++out.checked;
  }
  return out;
}

}  // namespace dynmis::neural
