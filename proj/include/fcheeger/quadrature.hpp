#ifndef FCHEEGER_QUADRATURE_HPP
#define FCHEEGER_QUADRATURE_HPP

#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace fcheeger {

/// Full Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(mid + half * nodes[k]);
    return acc * half;
  }
};

namespace detail {

template <int N>
GaussRule expand_gauss() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  GaussRule r;
  for (std::size_t k = x.size(); k-- > 0;) {
    if (x[k] == 0.0) continue;
    r.nodes.push_back(-x[k]);
    r.weights.push_back(w[k]);
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    r.nodes.push_back(x[k]);
    r.weights.push_back(w[k]);
  }
  return r;
}

}  // namespace detail

/// Cached rules of order 7, 10, 15, 20 or 30.
inline const GaussRule& gauss_rule(int order) {
  static const GaussRule r7 = detail::expand_gauss<7>();
  static const GaussRule r10 = detail::expand_gauss<10>();
  static const GaussRule r15 = detail::expand_gauss<15>();
  static const GaussRule r20 = detail::expand_gauss<20>();
  static const GaussRule r30 = detail::expand_gauss<30>();
  if (order <= 7) return r7;
  if (order <= 10) return r10;
  if (order <= 15) return r15;
  if (order <= 20) return r20;
  return r30;
}

}  // namespace fcheeger

#endif  // FCHEEGER_QUADRATURE_HPP
