#include "dynmis/adam.hpp"

#include <cmath>

#include "dynmis/errors.hpp"

namespace dynmis::neural {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& st) {
  if (params.size() != grads.size())
    throw Error(ErrorCode::DimensionMismatch, "parameter and gradient counts differ");
  if (st.first.empty()) {
    for (const Tensor* p : params) {
      st.first.emplace_back(p->shape());
      st.second.emplace_back(p->shape());
    }
  }
  if (st.first.size() != params.size())
    throw Error(ErrorCode::DimensionMismatch, "optimizer state does not match parameter list");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(st.first[i]))
      throw Error(ErrorCode::DimensionMismatch, "shape mismatch at parameter " + std::to_string(i));

  ++st.step;
  const auto& c = st.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto g = grads[i]->values();
    auto m = st.first[i].values();
    auto v = st.second[i].values();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p[k] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

}  // namespace dynmis::neural
