#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "alignflow/detail/gauss_rule.hpp"
#include "alignflow/errors.hpp"
#include "alignflow/field.hpp"
#include "alignflow/quadrature_oracle.hpp"
#include "alignflow/spectral.hpp"

namespace alignflow {

/// ω(ξ) = ξ − ξ^{1+α/2} on [0, δ) and γ log(ξ/δ) + ω(δ) beyond.
///
/// Admissibility: δ ∈ (0, 1), 0 < γ ≤ ω(δ)/(2 log 2), γ < cδ, and the
/// concavity condition 1 − (1+α/2)δ^{α/2} ≥ γ/δ (ω′ does not jump up at δ).
class ModulusOfContinuity {
 public:
  /// Default for the constant in γ < cδ. ω(ξ)/ξ^α is decreasing past δ
  /// exactly when γ < α ω(δ), so c = α/2 keeps a margin.
  static double default_c(double alpha) { return 0.5 * alpha; }

  ModulusOfContinuity(double delta, double gamma, double alpha)
      : ModulusOfContinuity(delta, gamma, alpha, default_c(alpha)) {}

  ModulusOfContinuity(double delta, double gamma, double alpha, double c)
      : delta_(delta), gamma_(gamma), alpha_(alpha), p_(1.0 + 0.5 * alpha) {
    std::string problems;
    auto fail = [&](const std::string& s) { problems += (problems.empty() ? "" : "; ") + s; };
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must be in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) fail("delta must be in (0, 1)");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) fail("gamma must be positive");
    if (!(c > 0.0)) fail("c must be positive");
    if (problems.empty()) {
      omega_delta_ = delta - std::pow(delta, p_);
      if (gamma > omega_delta_ / (2.0 * std::numbers::ln2)) fail("gamma exceeds omega(delta)/(2 log 2)");
      if (!(gamma < c * delta)) fail("gamma must be below c*delta");
      if (1.0 - p_ * std::pow(delta, 0.5 * alpha) < gamma / delta) fail("omega is not concave across delta");
    }
    if (!problems.empty()) throw ParameterError("inadmissible modulus: " + problems);
  }

  /// Largest γ admissible for (δ, α, c), or 0 when δ itself is too large.
  static double max_gamma(double delta, double alpha, double c) {
    const double p = 1.0 + 0.5 * alpha;
    const double slope = 1.0 - p * std::pow(delta, 0.5 * alpha);
    if (!(delta > 0.0 && delta < 1.0) || slope <= 0.0) return 0.0;
    const double od = delta - std::pow(delta, p);
    // γ < cδ is strict
    return std::min({od / (2.0 * std::numbers::ln2), c * delta * (1.0 - 1e-12), slope * delta});
  }
  static double max_gamma(double delta, double alpha) { return max_gamma(delta, alpha, default_c(alpha)); }

  double delta() const { return delta_; }
  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }
  double omega_at_delta() const { return omega_delta_; }

  double omega(double xi) const {
    check_xi(xi);
    if (xi < delta_) return xi - std::pow(xi, p_);
    return gamma_ * std::log(xi / delta_) + omega_delta_;
  }

  /// One-sided: the power branch is used on [0, δ), the log branch from δ on.
  double omega_prime(double xi) const {
    check_xi(xi);
    if (xi < delta_) return 1.0 - p_ * std::pow(xi, 0.5 * alpha_);
    return gamma_ / xi;
  }

  /// ω(b) − ω(a) for 0 ≤ a ≤ b without cancellation.
  double rise(double a, double b) const {
    if (b <= a) return 0.0;
    return rise_by(a, b - a);
  }

  /// ω(a + h) − ω(a), using the offset h itself rather than a rounded a + h.
  double rise_by(double a, double h) const {
    if (h <= 0.0) return 0.0;
    if (a >= delta_) return gamma_ * std::log1p(h / a);
    const double to_delta = delta_ - a;
    if (h <= to_delta) return power_rise(a, h);
    return power_rise(a, to_delta) + gamma_ * std::log1p((h - to_delta) / delta_);
  }

  /// ω(b) − ω(b − h) for 0 ≤ h ≤ b, again without forming b − h first.
  double fall_by(double b, double h) const {
    if (h <= 0.0) return 0.0;
    if (b <= delta_) return power_fall(b, h);
    const double above = b - delta_;
    if (h <= above) return -gamma_ * std::log1p(-h / b);
    return gamma_ * std::log(b / delta_) + power_fall(delta_, h - above);
  }

  /// 2ω(ξ) − ω(ξ+s) − ω(ξ−s) for 0 ≤ s ≤ ξ, nonnegative by concavity.
  double second_difference(double xi, double s) const {
    if (s <= 0.0) return 0.0;
    const double r = s / xi;
    // compare offsets, not ξ ± s: near ξ = δ the sum rounds back onto δ
    if (s <= delta_ - xi) {
      // the linear part cancels exactly; what remains is ξ^p ((1+r)^p + (1−r)^p − 2)
      return std::pow(xi, p_) * even_binomial_excess(r);
    }
    if (s <= xi - delta_) return -gamma_ * std::log1p(-r * r);
    return fall_by(xi, s) - rise_by(xi, s);
  }

 private:
  void check_xi(double xi) const {
    if (!(xi >= 0.0)) throw ParameterError("modulus argument must be nonnegative");
  }

  /// ω(a + h) − ω(a) on the power branch.
  double power_rise(double a, double h) const {
    const double pow_rise = a > 0.0 ? std::pow(a, p_) * std::expm1(p_ * std::log1p(h / a)) : std::pow(h, p_);
    return h - pow_rise;
  }

  /// ω(b) − ω(b − h) on the power branch.
  double power_fall(double b, double h) const {
    const double pow_fall = h < b ? -std::pow(b, p_) * std::expm1(p_ * std::log1p(-h / b)) : std::pow(b, p_);
    return h - pow_fall;
  }

  /// (1+r)^p + (1−r)^p − 2 for r ∈ [0, 1].
  double even_binomial_excess(double r) const {
    if (r >= 0.5) return std::pow(1.0 + r, p_) + std::pow(1.0 - r, p_) - 2.0;
    double coef = 1.0;  // binom(p, j)
    double rj = 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 120; ++j) {
      coef *= (p_ - j + 1) / j;
      rj *= r;
      if (j % 2 == 0) {
        const double term = 2.0 * coef * rj;
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      }
    }
    return sum;
  }

  double delta_;
  double gamma_;
  double alpha_;
  double p_;
  double omega_delta_ = 0.0;
};

/// Controls for the fixed-node quadratures behind Ω, A and D.
struct QuadratureControl {
  /// Gauss panels per graded cell; verification repeats with twice as many.
  int subdivisions = 1;
  bool verify = true;
  double tolerance = 1e-6;
  /// Improper integrals are cut at factor·max(ξ, δ) and closed analytically.
  double truncation_factor = 1e6;
};

namespace detail {

/// Integral over [a, b] on a mesh graded geometrically toward both ends, so
/// integrable endpoint singularities and kinks converge exponentially.
template <typename F>
double graded_segment(const F& f, double a, double b, int subdivisions) {
  if (!(b > a)) return 0.0;
  constexpr double ratio = 0.1;
  const double mid = 0.5 * (a + b);
  const double half = mid - a;
  double total = 0.0;
  auto one_side = [&](double end, double dir, double floor_width) {
    double outer = half;
    while (true) {
      double inner = outer * ratio;
      if (inner < floor_width) inner = 0.0;  // last panel reaches the end point
      const double lo = end + dir * inner;
      const double hi = end + dir * outer;
      total += gauss_composite<20>(f, std::min(lo, hi), std::max(lo, hi), subdivisions);
      if (inner == 0.0) break;
      outer = inner;
    }
  };
  // below these widths the offset from the end point is no longer representable
  one_side(a, 1.0, std::max(half * 1e-40, std::abs(a) * 1e-16));
  one_side(b, -1.0, std::max(half * 1e-40, std::abs(b) * 1e-16));
  return total;
}

/// Splits [a, b] at the interior breakpoints and integrates each piece.
template <typename F>
double integrate_pieces(const F& f, double a, double b, std::vector<double> breaks, int subdivisions) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  double prev = a;
  for (double x : breaks) {
    if (x <= prev || x > b) continue;
    total += graded_segment(f, prev, x, subdivisions);
    prev = x;
  }
  return total;
}

/// Runs `eval(subdivisions)`; with verification on, repeats at twice the
/// panels and throws when the two differ by more than the tolerance.
template <typename Eval>
double converged(const Eval& eval, const QuadratureControl& q, const char* what) {
  if (q.subdivisions < 1) throw ParameterError("subdivisions must be positive");
  const double coarse = eval(q.subdivisions);
  if (!q.verify) return coarse;
  const double fine = eval(2 * q.subdivisions);
  const double scale = std::max(std::abs(fine), 1e-300);
  if (!std::isfinite(fine) || std::abs(fine - coarse) > q.tolerance * scale) {
    throw AccuracyError(std::string(what) + " quadrature did not converge (" + std::to_string(coarse) + " vs " +
                        std::to_string(fine) + ")");
  }
  return fine;
}

inline double truncation_point(double xi, const ModulusOfContinuity& m, const QuadratureControl& q) {
  return q.truncation_factor * std::max(xi, m.delta());
}

/// ∫_T^∞ log(η/δ) η^{−1−α} dη
inline double log_tail(double T, double delta, double alpha) {
  return std::pow(T, -alpha) * (std::log(T / delta) / alpha + 1.0 / (alpha * alpha));
}

/// ∫_T^∞ (ξ/η)^k η^{−1−α} dη
inline double power_tail(double xi, double T, int k, double alpha) {
  return std::pow(xi / T, k) * std::pow(T, -alpha) / (k + alpha);
}

inline void check_xi_positive(double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw ParameterError("xi must be positive");
}

}  // namespace detail

/// Ω(ξ) = ∫_0^ξ ω(η)η^{−α} dη + ξ ∫_ξ^∞ ω(η)η^{−1−α} dη, with unit constant.
inline double velocity_modulus_Omega(double xi, const ModulusOfContinuity& m, const QuadratureControl& q = {}) {
  detail::check_xi_positive(xi);
  const double a = m.alpha();
  const double T = detail::truncation_point(xi, m, q);
  const double near = detail::converged(
      [&](int s) {
        return detail::integrate_pieces([&](double e) { return m.omega(e) * std::pow(e, -a); }, 0.0, xi,
                                        {m.delta()}, s);
      },
      q, "Omega (near)");
  const double far = detail::converged(
      [&](int s) {
        return detail::integrate_pieces([&](double e) { return m.omega(e) * std::pow(e, -1.0 - a); }, xi, T,
                                        {m.delta()}, s);
      },
      q, "Omega (far)");
  const double tail = m.gamma() * detail::log_tail(T, m.delta(), a) + m.omega_at_delta() * std::pow(T, -a) / a;
  return near + xi * (far + tail);
}

/// The four pieces of the lower bound A(ξ), before the −c_α factor:
/// A₁ over η < −ξ, A₂ over |η| < ξ, A₃ over [ξ, 2ξ] and A₄ beyond 2ξ.
/// A₂ and A₃ are nonnegative for a concave increasing ω.
struct LowerBoundSplit {
  double A1 = 0.0;
  double A2 = 0.0;
  double A3 = 0.0;
  double A4 = 0.0;
  /// A = −c_α (A₁ + A₂ + A₃ + A₄).
  double A = 0.0;
};

namespace detail {

/// ∫_0^ξ (2ω(ξ) − ω(ξ+s) − ω(ξ−s)) s^{−1−α} ds, shared by A and D.
inline double symmetric_core(double xi, const ModulusOfContinuity& m, const QuadratureControl& q) {
  const double a = m.alpha();
  return converged(
      [&](int s) {
        return integrate_pieces([&](double t) { return m.second_difference(xi, t) * std::pow(t, -1.0 - a); }, 0.0,
                                xi, {std::abs(xi - m.delta())}, s);
      },
      q, "second difference");
}

}  // namespace detail

inline LowerBoundSplit lower_bound_A_split(double xi, const ModulusOfContinuity& m, const QuadratureControl& q = {}) {
  detail::check_xi_positive(xi);
  const double a = m.alpha();
  const double d = m.delta();
  const double T = detail::truncation_point(xi, m, q);
  const double w = m.omega(xi);
  const double wd = m.omega_at_delta();
  LowerBoundSplit out;

  out.A2 = detail::symmetric_core(xi, m, q);
  out.A3 = detail::converged(
      [&](int s) {
        return detail::integrate_pieces([&](double e) { return m.rise(e - xi, xi) * std::pow(e, -1.0 - a); }, xi,
                                        2.0 * xi, {xi + d}, s);
      },
      q, "A3");

  // ω(ξ) − ω(ξ+η) over [ξ, ∞)
  const double a1_body = detail::converged(
      [&](int s) {
        return detail::integrate_pieces([&](double e) { return -m.rise(xi, xi + e) * std::pow(e, -1.0 - a); }, xi, T,
                                        {d - xi}, s);
      },
      q, "A1");
  // beyond T: ω(ξ) − ω_δ − γ log(η/δ) − γ log(1 + ξ/η)
  const double a1_tail = (w - wd) * std::pow(T, -a) / a - m.gamma() * detail::log_tail(T, d, a) -
                         m.gamma() * (detail::power_tail(xi, T, 1, a) - 0.5 * detail::power_tail(xi, T, 2, a));
  out.A1 = a1_body + a1_tail;

  // ω(ξ) − ω(η−ξ) over [2ξ, ∞)
  const double a4_body = detail::converged(
      [&](int s) {
        return detail::integrate_pieces(
            [&](double e) { return -m.rise(xi, e - xi) * std::pow(e, -1.0 - a); },
            2.0 * xi, T, {xi + d}, s);
      },
      q, "A4");
  // beyond T: ω(ξ) − ω_δ − γ log(η/δ) − γ log(1 − ξ/η)
  const double a4_tail = (w - wd) * std::pow(T, -a) / a - m.gamma() * detail::log_tail(T, d, a) +
                         m.gamma() * (detail::power_tail(xi, T, 1, a) + 0.5 * detail::power_tail(xi, T, 2, a));
  out.A4 = a4_body + a4_tail;

  out.A = -fractional_kernel_constant(a) * (out.A1 + out.A2 + out.A3 + out.A4);
  return out;
}

inline double lower_bound_A(double xi, const ModulusOfContinuity& m, const QuadratureControl& q = {}) {
  return lower_bound_A_split(xi, m, q).A;
}

/// D(ξ) = c_α [∫_0^{ξ/2} (2ω(ξ) − ω(ξ+2η) − ω(ξ−2η)) η^{−1−α} dη
///            + ∫_{ξ/2}^∞ (2ω(ξ) − ω(2η+ξ) + ω(2η−ξ)) η^{−1−α} dη],
/// evaluated in s = 2η.
inline double dissipation_D(double xi, const ModulusOfContinuity& m, const QuadratureControl& q = {}) {
  detail::check_xi_positive(xi);
  const double a = m.alpha();
  const double d = m.delta();
  const double T = detail::truncation_point(xi, m, q);
  const double w = m.omega(xi);
  const double first = detail::symmetric_core(xi, m, q);
  const double body = detail::converged(
      [&](int s) {
        return detail::integrate_pieces(
            [&](double t) { return (2.0 * w - m.rise(t - xi, t + xi)) * std::pow(t, -1.0 - a); }, xi, T,
            {d - xi, d + xi}, s);
      },
      q, "D");
  // beyond T the bracket is 2ω(ξ) − γ log((s+ξ)/(s−ξ)) = 2ω(ξ) − 2γ Σ_{k odd} (ξ/s)^k / k
  double tail = 2.0 * w * std::pow(T, -a) / a;
  for (int k = 1; k <= 7; k += 2) tail -= 2.0 * m.gamma() * detail::power_tail(xi, T, k, a) / k;
  const double value = fractional_kernel_constant(a) * std::pow(2.0, a) * (first + body + tail);
  if (!(value > 0.0)) throw AccuracyError("dissipation D is not positive at xi = " + std::to_string(xi));
  return value;
}

/// The three terms of ω′Ω + ωA − m D at one separation.
struct BreakthroughTerms {
  double omega_prime_Omega = 0.0;
  double omega_A = 0.0;
  double m_D = 0.0;
  double value = 0.0;
};

inline BreakthroughTerms breakthrough_terms(double xi, const ModulusOfContinuity& mod, double rho_min,
                                            const QuadratureControl& q = {}) {
  detail::check_xi_positive(xi);
  if (!(rho_min > 0.0)) throw ParameterError("rho_min must be positive");
  BreakthroughTerms t;
  t.omega_prime_Omega = mod.omega_prime(xi) * velocity_modulus_Omega(xi, mod, q);
  t.omega_A = mod.omega(xi) * lower_bound_A(xi, mod, q);
  t.m_D = rho_min * dissipation_D(xi, mod, q);
  t.value = t.omega_prime_Omega + t.omega_A - t.m_D;
  return t;
}

inline double breakthrough_functional(double xi, const ModulusOfContinuity& mod, double rho_min,
                                      const QuadratureControl& q = {}) {
  return breakthrough_terms(xi, mod, rho_min, q).value;
}

/// log-uniform ξ samples over [lo·δ, hi·δ].
inline std::vector<double> breakthrough_samples(double delta, std::size_t count = 200, double lo = 1e-4,
                                                double hi = 1e3) {
  if (count < 2) throw ParameterError("need at least two samples");
  std::vector<double> xs(count);
  const double a = std::log(lo * delta);
  const double b = std::log(hi * delta);
  for (std::size_t i = 0; i < count; ++i) xs[i] = std::exp(a + (b - a) * i / (count - 1));
  return xs;
}

struct BreakthroughScan {
  bool negative_everywhere = true;
  double worst_value = -std::numeric_limits<double>::infinity();
  double worst_xi = 0.0;
  std::size_t evaluated = 0;
};

/// Evaluates the functional on the samples, stopping at the first
/// nonnegative value when `early_exit` is set. Every tenth sample is visited
/// first so failures show up early.
inline BreakthroughScan scan_breakthrough(const ModulusOfContinuity& mod, double rho_min,
                                          const std::vector<double>& xs, const QuadratureControl& q = {},
                                          bool early_exit = true) {
  BreakthroughScan out;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < xs.size(); i += 10) order.push_back(i);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i % 10 != 0) order.push_back(i);
  }
  for (std::size_t i : order) {
    const double v = breakthrough_functional(xs[i], mod, rho_min, q);
    ++out.evaluated;
    if (v > out.worst_value) {
      out.worst_value = v;
      out.worst_xi = xs[i];
    }
    if (!(v < 0.0)) {
      out.negative_everywhere = false;
      if (early_exit) break;
    }
  }
  return out;
}

struct FeasibilityOptions {
  double delta_start = 0.5;
  double delta_min = 1e-12;
  /// Ratio between consecutive δ on the ladder.
  double delta_ratio = 1.189207115002721;  // 2^{1/4}
  /// γ is searched on γ_max·2^{−k} for k = 0..gamma_halvings.
  int gamma_halvings = 20;
  std::size_t xi_samples = 200;
  double xi_lo = 1e-4;
  double xi_hi = 1e3;
  /// Constant of γ < cδ; nonpositive means the α-dependent default.
  double c = 0.0;
  QuadratureControl quadrature{1, false, 1e-6, 1e6};
};

struct FeasibilityResult {
  bool found = false;
  double delta = 0.0;
  double gamma = 0.0;
  double worst_value = 0.0;
  double worst_xi = 0.0;
  std::size_t candidates = 0;
};

/// Walks δ down the ladder and returns the first (largest) δ with some
/// admissible γ making the breakthrough functional negative at every
/// sample; for that δ the largest such γ on the halving ladder is kept.
/// Smaller γ only weakens the velocity and lower-bound terms, so each δ is
/// screened with its smallest γ first.
inline FeasibilityResult find_feasible_modulus(double alpha, double rho_min, const FeasibilityOptions& opt = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must be in (0, 1)");
  if (!(rho_min > 0.0)) throw ParameterError("rho_min must be positive");
  if (!(opt.delta_ratio > 1.0)) throw ParameterError("delta_ratio must exceed 1");
  const double c = opt.c > 0.0 ? opt.c : ModulusOfContinuity::default_c(alpha);
  FeasibilityResult res;
  for (double delta = opt.delta_start; delta >= opt.delta_min; delta /= opt.delta_ratio) {
    const double gmax = ModulusOfContinuity::max_gamma(delta, alpha, c);
    if (!(gmax > 0.0)) continue;
    const auto xs = breakthrough_samples(delta, opt.xi_samples, opt.xi_lo, opt.xi_hi);
    auto test = [&](int k, BreakthroughScan& scan) {
      ++res.candidates;
      const ModulusOfContinuity mod(delta, std::ldexp(gmax, -k), alpha, c);
      scan = scan_breakthrough(mod, rho_min, xs, opt.quadrature);
      return scan.negative_everywhere;
    };
    BreakthroughScan scan;
    if (!test(opt.gamma_halvings, scan)) continue;
    // bisect for the smallest k (largest γ) that still passes
    int lo = -1;
    int hi = opt.gamma_halvings;
    BreakthroughScan best = scan;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (test(mid, scan)) {
        hi = mid;
        best = scan;
      } else {
        lo = mid;
      }
    }
    res.found = true;
    res.delta = delta;
    res.gamma = std::ldexp(gmax, -hi);
    res.worst_value = best.worst_value;
    res.worst_xi = best.worst_xi;
    return res;
  }
  return res;
}

/// ω_λ(ξ) = ω(ξ/λ), with λ held as log λ so that very small λ stays exact.
class ScaledModulus {
 public:
  ScaledModulus(ModulusOfContinuity base, double log_lambda) : base_(base), log_lambda_(log_lambda) {
    if (!std::isfinite(log_lambda)) throw ParameterError("log lambda must be finite");
  }

  double operator()(double xi) const {
    if (!(xi >= 0.0)) throw ParameterError("modulus argument must be nonnegative");
    if (xi == 0.0) return 0.0;
    const double log_arg = std::log(xi) - log_lambda_;
    if (log_arg < std::log(base_.delta())) return base_.omega(std::exp(log_arg));
    return base_.gamma() * (log_arg - std::log(base_.delta())) + base_.omega_at_delta();
  }

  const ModulusOfContinuity& base() const { return base_; }
  double log_lambda() const { return log_lambda_; }
  double lambda() const { return std::exp(log_lambda_); }

 private:
  ModulusOfContinuity base_;
  double log_lambda_;
};

struct MocReport {
  bool obeys = true;
  /// min over pairs of ω_λ(d) − |f(x) − f(y)|.
  double margin = std::numeric_limits<double>::infinity();
  double x = 0.0;
  double y = 0.0;
};

/// Checks |f(x) − f(y)| < ω_λ(d(x, y)) for all pairs of the 4×-interpolated
/// grid, d being the periodic distance.
inline MocReport moc_check(const RealField& field, const ScaledModulus& w) {
  field.validate("field");
  const RealField fine = fourier_interpolate(field, 4);
  const auto& g = fine.grid();
  const std::size_t n = fine.size();
  // ω_λ depends on the pair only through the index separation
  std::vector<double> bound(n / 2 + 1, 0.0);
  for (std::size_t k = 1; k <= n / 2; ++k) bound[k] = w(static_cast<double>(k) * g.spacing());
  MocReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 1; k <= n / 2; ++k) {
      const std::size_t j = (i + k) % n;
      const double margin = bound[k] - std::abs(fine[i] - fine[j]);
      if (margin < rep.margin) {
        rep.margin = margin;
        rep.x = g.node(i);
        rep.y = g.node(j);
      }
    }
  }
  rep.obeys = rep.margin > 0.0;
  return rep;
}

inline MocReport moc_check(const RealField& field, const ModulusOfContinuity& m, double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  return moc_check(field, ScaledModulus(m, std::log(lambda)));
}

/// Largest log λ ≤ 0 (to within `tol` in log λ) for which the field obeys
/// ω_λ. Obeying is monotone in λ because ω is increasing.
inline double largest_admissible_log_lambda(const RealField& field, const ModulusOfContinuity& m, double tol = 1e-6) {
  auto obeys = [&](double ll) { return moc_check(field, ScaledModulus(m, ll)).obeys; };
  if (obeys(0.0)) return 0.0;
  double lo = -1.0;
  while (!obeys(lo)) {
    lo *= 2.0;
    if (lo < -1e6) throw ParameterError("no admissible scaling found");
  }
  double hi = lo / 2.0;
  if (lo == -1.0) hi = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (obeys(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace alignflow
