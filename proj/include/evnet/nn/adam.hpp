#pragma once

#include "evnet/nn/tape.hpp"

#include <map>
#include <string>

namespace evnet::nn {

struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::map<std::string, Matrix> first_moment;
  std::map<std::string, Matrix> second_moment;
};

/// One bias-corrected Adam update of every tensor in `params`. Tensors with
/// no entry in `grads` are treated as having a zero gradient. Throws
/// std::domain_error naming the tensor if a gradient is not finite.
void adam_step(ParamStore& params, const Gradients& grads, AdamState& state);

}  // namespace evnet::nn
