#pragma once

#include <functional>
#include <span>

#include "udrl/nn/train.hpp"

namespace udrl::nn {

// Evaluates the loss at the current parameters. When `grad` is non-empty
// the analytic gradient is accumulated into it.
using LossFunction = std::function<double(std::span<double> grad)>;

// Compares the analytic gradient with central differences
// (f(theta + eps) - f(theta - eps)) / (2 eps), one parameter at a time, and
// returns max |analytic - numeric| / max(1e-6, |analytic| + |numeric|). The floor
// keeps near-zero gradients, where central differences are pure roundoff
// (~1e-16 / eps), from reading as large relative errors.
// Parameters are restored before returning.
double max_relative_error(std::span<double> params, const LossFunction& loss, double eps);

double grad_check(Mlp& net, const OutputHead& head, const Example& example, LossKind loss, double eps = 1e-5);

double grad_check(RecurrentNet& net, const OutputHead& head, const SequenceExample& example, LossKind loss,
                  double eps = 1e-5);

}  // namespace udrl::nn
