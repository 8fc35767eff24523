#include "udrl/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "udrl/nn/activation.hpp"

namespace udrl::nn {

namespace {

constexpr double kProbFloor = 1e-12;

void check_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::mse: return "mse";
    case LossKind::crossentropy: return "crossentropy";
    case LossKind::gaussian_nll: return "gaussian_nll";
  }
  return "mse";
}

LossKind loss_from_string(std::string_view s) {
  if (s == "mse") return LossKind::mse;
  if (s == "crossentropy") return LossKind::crossentropy;
  if (s == "gaussian_nll") return LossKind::gaussian_nll;
  throw std::invalid_argument("unknown loss '" + std::string(s) + "'");
}

std::string_view to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::softmax: return "softmax";
    case HeadKind::sigmoid: return "sigmoid";
    case HeadKind::gaussian: return "gaussian";
  }
  return "softmax";
}

HeadKind head_from_string(std::string_view s) {
  if (s == "softmax") return HeadKind::softmax;
  if (s == "sigmoid") return HeadKind::sigmoid;
  if (s == "gaussian") return HeadKind::gaussian;
  throw std::invalid_argument("unknown head '" + std::string(s) + "'");
}

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  check_same(pred.size(), target.size(), "mse_loss");
  LossResult r;
  r.grad.resize(pred.size());
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    r.value += d * d / n;
    r.grad[i] = 2.0 * d / n;
  }
  return r;
}

LossResult crossentropy_loss(std::span<const double> probs, std::span<const double> target) {
  check_same(probs.size(), target.size(), "crossentropy_loss");
  LossResult r;
  r.grad.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::max(probs[i], kProbFloor);
    r.value -= target[i] * std::log(p);
    r.grad[i] = -target[i] / p;
  }
  return r;
}

LossResult binary_crossentropy_loss(std::span<const double> probs, std::span<const double> target) {
  check_same(probs.size(), target.size(), "binary_crossentropy_loss");
  LossResult r;
  r.grad.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbFloor, 1.0 - kProbFloor);
    r.value -= target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
    r.grad[i] = -target[i] / p + (1.0 - target[i]) / (1.0 - p);
  }
  return r;
}

LossResult gaussian_nll(std::span<const double> pred, std::span<const double> target) {
  check_same(pred.size(), 2 * target.size(), "gaussian_nll");
  const std::size_t d = target.size();
  LossResult r;
  r.grad.assign(pred.size(), 0.0);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < d; ++i) {
    const double mu = pred[i];
    const double logvar = pred[d + i];
    const double inv_var = std::exp(-logvar);
    const double diff = target[i] - mu;
    r.value += 0.5 * (log2pi + logvar + diff * diff * inv_var);
    r.grad[i] = -diff * inv_var;
    r.grad[d + i] = 0.5 * (1.0 - diff * diff * inv_var);
  }
  return r;
}

OutputHead::OutputHead(HeadKind kind, std::size_t action_dim) : kind_(kind), action_dim_(action_dim) {
  if (action_dim == 0) throw std::invalid_argument("output head: action_dim must be positive");
}

std::vector<double> OutputHead::transform(std::span<const double> raw) const {
  check_same(raw.size(), raw_dim(), "output head");
  std::vector<double> out(raw.size());
  switch (kind_) {
    case HeadKind::softmax: {
      const double mx = *std::max_element(raw.begin(), raw.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = std::exp(raw[i] - mx);
        sum += out[i];
      }
      for (auto& v : out) v /= sum;
      break;
    }
    case HeadKind::sigmoid:
      for (std::size_t i = 0; i < raw.size(); ++i) out[i] = sigmoid(raw[i]);
      break;
    case HeadKind::gaussian:
      for (std::size_t i = 0; i < action_dim_; ++i) {
        out[i] = raw[i];
        out[action_dim_ + i] = std::exp(raw[action_dim_ + i]);
      }
      break;
  }
  return out;
}

std::vector<double> OutputHead::probabilities(std::span<const double> raw) const {
  if (kind_ == HeadKind::gaussian) throw std::invalid_argument("output head: gaussian head has no categorical form");
  auto p = transform(raw);
  if (kind_ == HeadKind::sigmoid) {
    double sum = 0.0;
    for (double v : p) sum += v;
    if (sum <= 0.0) {
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    } else {
      for (auto& v : p) v /= sum;
    }
  }
  return p;
}

LossResult OutputHead::loss(std::span<const double> raw, std::span<const double> target, LossKind kind) const {
  check_same(target.size(), action_dim_, "output head target");
  switch (kind_) {
    case HeadKind::softmax: {
      const auto p = transform(raw);
      if (kind == LossKind::crossentropy) {
        LossResult r = crossentropy_loss(p, target);
        double tsum = 0.0;
        for (double t : target) tsum += t;
        for (std::size_t i = 0; i < p.size(); ++i) r.grad[i] = p[i] * tsum - target[i];
        return r;
      }
      if (kind != LossKind::mse) break;
      LossResult r = mse_loss(p, target);
      // Softmax Jacobian: d raw_i = p_i (g_i - sum_j p_j g_j).
      double dot = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * r.grad[i];
      for (std::size_t i = 0; i < p.size(); ++i) r.grad[i] = p[i] * (r.grad[i] - dot);
      return r;
    }
    case HeadKind::sigmoid: {
      const auto p = transform(raw);
      if (kind == LossKind::crossentropy) {
        LossResult r = binary_crossentropy_loss(p, target);
        for (std::size_t i = 0; i < p.size(); ++i) r.grad[i] = p[i] - target[i];
        return r;
      }
      if (kind != LossKind::mse) break;
      LossResult r = mse_loss(p, target);
      for (std::size_t i = 0; i < p.size(); ++i) r.grad[i] *= p[i] * (1.0 - p[i]);
      return r;
    }
    case HeadKind::gaussian: {
      if (kind == LossKind::gaussian_nll) return gaussian_nll(raw, target);
      if (kind != LossKind::mse) break;
      LossResult m = mse_loss(raw.subspan(0, action_dim_), target);
      LossResult r;
      r.value = m.value;
      r.grad.assign(raw.size(), 0.0);
      std::copy(m.grad.begin(), m.grad.end(), r.grad.begin());
      return r;
    }
  }
  throw std::invalid_argument("output head: loss " + std::string(to_string(kind)) + " unsupported for " +
                              std::string(to_string(kind_)) + " head");
}

}  // namespace udrl::nn
