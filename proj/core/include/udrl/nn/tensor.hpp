#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace udrl::nn {

// Dense row-major array. Used for checkpoint shape tables; networks keep
// their parameters in one flat vector and expose tensor views on demand.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != element_count(shape)) throw std::invalid_argument("tensor: data length does not match shape");
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    for (auto d : s) {
      if (d == 0) throw std::invalid_argument("tensor: dimensions must be positive");
    }
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t size() const { return data.size(); }
  bool operator==(const Tensor&) const = default;
};

}  // namespace udrl::nn
