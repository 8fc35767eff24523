#include "udrl/nn/recurrent.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "udrl/nn/activation.hpp"

namespace udrl::nn {

std::string_view to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "elman"; }

CellKind cell_from_string(std::string_view s) {
  if (s == "lstm") return CellKind::lstm;
  if (s == "elman") return CellKind::elman;
  throw std::invalid_argument("unknown cell kind '" + std::string(s) + "'");
}

RecurrentNet::RecurrentNet(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim, CellKind kind)
    : kind_(kind), input_dim_(input_dim), hidden_dim_(hidden_dim), output_dim_(output_dim) {
  if (input_dim == 0 || hidden_dim == 0 || output_dim == 0) {
    throw std::invalid_argument("recurrent net: dimensions must be positive");
  }
  params_.assign(off_bo() + output_dim_, 0.0);
}

void RecurrentNet::initialize(CounterRng& rng) {
  const double cell_bound = 1.0 / std::sqrt(static_cast<double>(input_dim_ + hidden_dim_));
  for (std::size_t i = 0; i < off_wo(); ++i) params_[i] = rng.uniform(-cell_bound, cell_bound);
  const double out_bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim_));
  for (std::size_t i = off_wo(); i < params_.size(); ++i) params_[i] = rng.uniform(-out_bound, out_bound);
}

RecurrentNet::State RecurrentNet::initial_state() const {
  State s;
  s.h.assign(hidden_dim_, 0.0);
  if (kind_ == CellKind::lstm) s.c.assign(hidden_dim_, 0.0);
  return s;
}

std::vector<double> RecurrentNet::cell_step(std::span<const double> x, State& state, Tape::Step* rec) const {
  if (x.size() != input_dim_) {
    throw std::invalid_argument("recurrent net: input length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(input_dim_));
  }
  if (state.h.size() != hidden_dim_) throw std::invalid_argument("recurrent net: hidden state has wrong size");
  const std::size_t G = gates();
  const std::size_t H = hidden_dim_;
  const std::size_t I = input_dim_;
  const double* wx = params_.data();
  const double* wh = params_.data() + off_wh();
  const double* b = params_.data() + off_b();

  std::vector<double> pre(G * H);
  for (std::size_t r = 0; r < G * H; ++r) {
    double acc = b[r];
    const double* rx = wx + r * I;
    for (std::size_t c = 0; c < I; ++c) acc += rx[c] * x[c];
    const double* rh = wh + r * H;
    for (std::size_t c = 0; c < H; ++c) acc += rh[c] * state.h[c];
    pre[r] = acc;
  }

  if (rec != nullptr) {
    rec->x.assign(x.begin(), x.end());
    rec->h_prev = state.h;
    rec->c_prev = state.c;
  }

  std::vector<double> h(H);
  if (kind_ == CellKind::elman) {
    for (std::size_t u = 0; u < H; ++u) h[u] = std::tanh(pre[u]);
    if (rec != nullptr) rec->gates = h;
  } else {
    std::vector<double> c(H), tc(H);
    for (std::size_t u = 0; u < H; ++u) {
      pre[u] = sigmoid(pre[u]);                  // i
      pre[H + u] = sigmoid(pre[H + u]);          // f
      pre[2 * H + u] = std::tanh(pre[2 * H + u]);  // g
      pre[3 * H + u] = sigmoid(pre[3 * H + u]);  // o
      c[u] = pre[H + u] * state.c[u] + pre[u] * pre[2 * H + u];
      tc[u] = std::tanh(c[u]);
      h[u] = pre[3 * H + u] * tc[u];
    }
    if (rec != nullptr) {
      rec->gates = pre;
      rec->c = c;
      rec->tanh_c = tc;
    }
    state.c = std::move(c);
  }
  state.h = h;
  if (rec != nullptr) rec->h = h;

  const double* wo = params_.data() + off_wo();
  const double* bo = params_.data() + off_bo();
  std::vector<double> y(output_dim_);
  for (std::size_t r = 0; r < output_dim_; ++r) {
    double acc = bo[r];
    const double* row = wo + r * H;
    for (std::size_t c = 0; c < H; ++c) acc += row[c] * h[c];
    y[r] = acc;
  }
  return y;
}

std::vector<double> RecurrentNet::step(std::span<const double> x, State& state) const {
  return cell_step(x, state, nullptr);
}

std::vector<std::vector<double>> RecurrentNet::unroll(std::span<const std::vector<double>> xs, State& state,
                                                      Tape* tape) const {
  std::vector<std::vector<double>> ys;
  ys.reserve(xs.size());
  if (tape != nullptr) {
    tape->steps.clear();
    tape->steps.resize(xs.size());
  }
  for (std::size_t t = 0; t < xs.size(); ++t) {
    ys.push_back(cell_step(xs[t], state, tape != nullptr ? &tape->steps[t] : nullptr));
  }
  return ys;
}

void RecurrentNet::backward(const Tape& tape, std::span<const std::vector<double>> grad_outputs,
                            std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("recurrent net: gradient buffer has wrong size");
  if (grad_outputs.size() != tape.steps.size()) {
    throw std::invalid_argument("recurrent net: one output gradient per taped step required");
  }
  const std::size_t G = gates();
  const std::size_t H = hidden_dim_;
  const std::size_t I = input_dim_;
  const double* wh = params_.data() + off_wh();
  const double* wo = params_.data() + off_wo();
  double* gwx = grad.data();
  double* gwh = grad.data() + off_wh();
  double* gb = grad.data() + off_b();
  double* gwo = grad.data() + off_wo();
  double* gbo = grad.data() + off_bo();

  std::vector<double> dh_next(H, 0.0);
  std::vector<double> dc_next(H, 0.0);
  std::vector<double> dpre(G * H);
  for (std::size_t t = tape.steps.size(); t-- > 0;) {
    const auto& s = tape.steps[t];
    std::vector<double> dh = dh_next;
    const auto& dy = grad_outputs[t];
    if (!dy.empty()) {
      if (dy.size() != output_dim_) throw std::invalid_argument("recurrent net: output gradient has wrong size");
      for (std::size_t r = 0; r < output_dim_; ++r) {
        gbo[r] += dy[r];
        const double* row = wo + r * H;
        double* grow = gwo + r * H;
        for (std::size_t c = 0; c < H; ++c) {
          grow[c] += dy[r] * s.h[c];
          dh[c] += dy[r] * row[c];
        }
      }
    }

    if (kind_ == CellKind::elman) {
      for (std::size_t u = 0; u < H; ++u) dpre[u] = dh[u] * (1.0 - s.h[u] * s.h[u]);
    } else {
      for (std::size_t u = 0; u < H; ++u) {
        const double i = s.gates[u], f = s.gates[H + u], g = s.gates[2 * H + u], o = s.gates[3 * H + u];
        const double dc = dh[u] * o * (1.0 - s.tanh_c[u] * s.tanh_c[u]) + dc_next[u];
        dpre[u] = dc * g * i * (1.0 - i);
        dpre[H + u] = dc * s.c_prev[u] * f * (1.0 - f);
        dpre[2 * H + u] = dc * i * (1.0 - g * g);
        dpre[3 * H + u] = dh[u] * s.tanh_c[u] * o * (1.0 - o);
        dc_next[u] = dc * f;
      }
    }

    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t r = 0; r < G * H; ++r) {
      const double d = dpre[r];
      gb[r] += d;
      if (d == 0.0) continue;
      double* gx = gwx + r * I;
      for (std::size_t c = 0; c < I; ++c) gx[c] += d * s.x[c];
      double* gh = gwh + r * H;
      const double* rh = wh + r * H;
      for (std::size_t c = 0; c < H; ++c) {
        gh[c] += d * s.h_prev[c];
        dh_next[c] += d * rh[c];
      }
    }
  }
}

std::vector<Tensor> RecurrentNet::tensors() const {
  const std::size_t G = gates();
  auto slice = [&](std::size_t from, std::size_t to) {
    return std::vector<double>(params_.begin() + static_cast<std::ptrdiff_t>(from),
                               params_.begin() + static_cast<std::ptrdiff_t>(to));
  };
  return {Tensor({G * hidden_dim_, input_dim_}, slice(0, off_wh())),
          Tensor({G * hidden_dim_, hidden_dim_}, slice(off_wh(), off_b())),
          Tensor({G * hidden_dim_}, slice(off_b(), off_wo())),
          Tensor({output_dim_, hidden_dim_}, slice(off_wo(), off_bo())),
          Tensor({output_dim_}, slice(off_bo(), params_.size()))};
}

void RecurrentNet::load_tensors(const std::vector<Tensor>& tensors) {
  const auto expected = this->tensors();
  if (tensors.size() != expected.size()) throw std::invalid_argument("recurrent net: tensor count mismatch");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].shape != expected[i].shape) throw std::invalid_argument("recurrent net: tensor shape mismatch");
    std::copy(tensors[i].data.begin(), tensors[i].data.end(), params_.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += tensors[i].size();
  }
}

}  // namespace udrl::nn
