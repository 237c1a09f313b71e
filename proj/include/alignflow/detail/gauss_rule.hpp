#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cstddef>
#include <vector>

namespace alignflow::detail {

/// Full N-point Gauss–Legendre rule on [-1, 1], expanded from Boost's
/// half-line tables.
template <unsigned N>
struct GaussLegendre {
  static_assert(N % 2 == 0, "use an even rule so there is no centre node");

  struct Node {
    double x;
    double w;
  };

  static const std::vector<Node>& nodes() {
    static const std::vector<Node> rule = [] {
      using G = boost::math::quadrature::gauss<double, N>;
      std::vector<Node> r;
      const auto& xs = G::abscissa();
      const auto& ws = G::weights();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        r.push_back({-xs[i], ws[i]});
        r.push_back({xs[i], ws[i]});
      }
      return r;
    }();
    return rule;
  }
};

/// Fixed-order Gauss–Legendre integral of f over [a, b].
template <unsigned N = 20, typename F>
double gauss_panel(F&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (const auto& nd : GaussLegendre<N>::nodes()) s += nd.w * f(mid + half * nd.x);
  return s * half;
}

/// Splits [a, b] into `pieces` equal panels.
template <unsigned N = 20, typename F>
double gauss_composite(F&& f, double a, double b, int pieces) {
  const double width = (b - a) / pieces;
  double s = 0.0;
  for (int i = 0; i < pieces; ++i) s += gauss_panel<N>(f, a + i * width, a + (i + 1) * width);
  return s;
}

}  // namespace alignflow::detail
