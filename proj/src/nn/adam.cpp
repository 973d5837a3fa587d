#include "evnet/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace evnet::nn {

void adam_step(ParamStore& params, const Gradients& grads, AdamState& state) {
  for (const auto& [name, g] : grads) {
    if (!params.contains(name)) throw std::invalid_argument("gradient for unknown parameter '" + name + "'");
    const Matrix& p = params.get(name);
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw std::invalid_argument("gradient shape mismatch for '" + name + "'");
    if (!g.allFinite()) throw std::domain_error("non-finite gradient for '" + name + "'");
  }

  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (auto& [name, p] : params.tensors()) {
    auto [m_it, m_new] = state.first_moment.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
    auto [v_it, v_new] = state.second_moment.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
    Matrix& m = m_it->second;
    Matrix& v = v_it->second;
    auto g_it = grads.find(name);
    if (g_it != grads.end()) {
      m = state.beta1 * m + (1.0 - state.beta1) * g_it->second;
      v = state.beta2 * v + (1.0 - state.beta2) * g_it->second.cwiseAbs2();
    } else {
      m *= state.beta1;
      v *= state.beta2;
    }
    p.array() -= state.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  }
}

}  // namespace evnet::nn
