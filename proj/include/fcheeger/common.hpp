#ifndef FCHEEGER_COMMON_HPP
#define FCHEEGER_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcheeger {

/// Rejected input: bad parameters, mismatched grids, malformed files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver stopped without meeting its convergence test.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One byte per grid cell; nonzero means "in the set".
using CellMask = std::vector<std::uint8_t>;

/// Volume of the unit ball in R^N (omega_0 = 1, omega_1 = 2, omega_2 = pi).
inline double unit_ball_volume(int n) {
  switch (n) {
    case 0: return 1.0;
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default:
      return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  }
}

namespace detail {

inline double pairwise_sum_impl(const double* x, std::size_t n) {
  if (n <= 16) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(x, half) + pairwise_sum_impl(x + half, n - half);
}

}  // namespace detail

/// Tree reduction; the summation order depends only on the length.
inline double pairwise_sum(std::span<const double> x) {
  return detail::pairwise_sum_impl(x.data(), x.size());
}

inline std::size_t count_set(std::span<const std::uint8_t> mask) {
  std::size_t c = 0;
  for (auto m : mask) c += (m != 0);
  return c;
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

}  // namespace fcheeger

#endif  // FCHEEGER_COMMON_HPP
