#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace udrl::nn {

enum class LossKind { mse, crossentropy, gaussian_nll };

std::string_view to_string(LossKind kind);
LossKind loss_from_string(std::string_view s);

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // dLoss/dpred
};

// Mean over components: (1/d) sum (p - t)^2.
LossResult mse_loss(std::span<const double> pred, std::span<const double> target);

// Categorical cross-entropy -sum t log p over a probability vector.
LossResult crossentropy_loss(std::span<const double> probs, std::span<const double> target);

// Independent Bernoulli cross-entropy -sum [t log p + (1-t) log(1-p)].
LossResult binary_crossentropy_loss(std::span<const double> probs, std::span<const double> target);

// pred = [means (d), log-variances (d)], target length d. Summed over dims:
// 0.5 * sum [log(2 pi) + logvar + (t - mu)^2 / exp(logvar)].
LossResult gaussian_nll(std::span<const double> pred, std::span<const double> target);

enum class HeadKind { softmax, sigmoid, gaussian };

std::string_view to_string(HeadKind kind);
HeadKind head_from_string(std::string_view s);

// Maps raw network outputs to an action distribution.
//   softmax:  categorical over action_dim classes
//   sigmoid:  action_dim independent units in (0,1); as a categorical
//             distribution they are normalized to sum to 1
//   gaussian: raw = [mean (action_dim), log-variance (action_dim)]
class OutputHead {
 public:
  OutputHead() = default;
  OutputHead(HeadKind kind, std::size_t action_dim);

  HeadKind kind() const { return kind_; }
  std::size_t action_dim() const { return action_dim_; }
  std::size_t raw_dim() const { return kind_ == HeadKind::gaussian ? 2 * action_dim_ : action_dim_; }

  // softmax probabilities, sigmoid activations, or [mean, variance].
  std::vector<double> transform(std::span<const double> raw) const;

  // Categorical probabilities over action_dim actions (softmax/sigmoid only).
  std::vector<double> probabilities(std::span<const double> raw) const;

  // Loss of the head's prediction against `target` (one-hot or bit vector
  // for softmax/sigmoid, real action for gaussian); gradient w.r.t. raw.
  LossResult loss(std::span<const double> raw, std::span<const double> target, LossKind kind) const;

  bool operator==(const OutputHead&) const = default;

 private:
  HeadKind kind_ = HeadKind::softmax;
  std::size_t action_dim_ = 1;
};

}  // namespace udrl::nn
