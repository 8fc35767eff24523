#include "udrl/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace udrl::nn {

namespace {

constexpr double kErrorFloor = 1e-6;

}  // namespace

double max_relative_error(std::span<double> params, const LossFunction& loss, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw std::invalid_argument("grad_check: eps must lie in [1e-7, 1e-3]");
  std::vector<double> analytic(params.size(), 0.0);
  loss(analytic);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double plus = loss({});
    params[i] = saved - eps;
    const double minus = loss({});
    params[i] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double err = std::abs(analytic[i] - numeric) / std::max(kErrorFloor, std::abs(analytic[i]) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

double grad_check(Mlp& net, const OutputHead& head, const Example& example, LossKind loss, double eps) {
  const std::span<const Example> batch(&example, 1);
  return max_relative_error(
      net.params(),
      [&](std::span<double> grad) {
        if (grad.empty()) {
          std::vector<double> scratch(net.num_params(), 0.0);
          return batch_gradient(net, head, batch, loss, scratch);
        }
        return batch_gradient(net, head, batch, loss, grad);
      },
      eps);
}

double grad_check(RecurrentNet& net, const OutputHead& head, const SequenceExample& example, LossKind loss,
                  double eps) {
  const std::span<const SequenceExample> batch(&example, 1);
  const std::size_t window = example.inputs.size() + 1;
  return max_relative_error(
      net.params(),
      [&](std::span<double> grad) {
        if (grad.empty()) {
          std::vector<double> scratch(net.num_params(), 0.0);
          return sequence_gradient(net, head, batch, loss, scratch, window);
        }
        return sequence_gradient(net, head, batch, loss, grad, window);
      },
      eps);
}

}  // namespace udrl::nn
