#include "udrl/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace udrl::nn {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(s) + "'");
}

double global_norm(std::span<const double> g) {
  double sq = 0.0;
  for (double x : g) sq += x * x;
  return std::sqrt(sq);
}

void Optimizer::reset() {
  m_.clear();
  v_.clear();
  t_ = 0;
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw std::invalid_argument("optimizer: params/grad size mismatch");
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
    t_ = 0;
  }
  double scale = 1.0;
  if (config_.clip_norm > 0.0) {
    const double norm = global_norm(grad);
    if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
  }
  ++t_;
  const double lr = config_.lr;
  if (config_.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = config_.momentum * m_[i] + scale * grad[i];
      params[i] -= lr * m_[i];
    }
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = scale * grad[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
  }
}

}  // namespace udrl::nn
