#include "gossip/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gossip::bounds {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::optimal:
      return "optimal";
    case Regime::parameterized:
      return "parameterized";
    case Regime::standard_push:
      return "standard_push";
    case Regime::strong_adversary:
      return "strong_adversary";
  }
  return "?";
}

namespace {

void check_counts(std::uint32_t f, std::uint32_t n) {
  if (n < 2 || f + 2 > n)
    throw std::invalid_argument("bounds: need 0 <= f <= n-2");
}

void check_s(double s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::invalid_argument("bounds: s must lie in [0,1]");
}

}  // namespace

double optimal_delta(double epsilon, std::uint32_t f, std::uint32_t n) {
  check_counts(f, n);
  if (epsilon < 0.0) throw std::invalid_argument("bounds: epsilon must be >= 0");
  if (f == 0) return 0.0;
  const double fd = f;
  const double delta = (fd / n) * (1.0 - std::expm1(epsilon) / fd);
  return std::max(0.0, delta);
}

double optimal_c(std::uint32_t f, std::uint32_t n) {
  check_counts(f, n);
  return static_cast<double>(n) / (f + 1.0) - 1.0;
}

double param_delta_exact(double s, std::uint32_t f, std::uint32_t n) {
  check_counts(f, n);
  check_s(s);
  if (s == 1.0) return 1.0;
  const double q = 1.0 - static_cast<double>(f) / n;
  return 1.0 - (1.0 - s) * q / (1.0 - s * q);
}

double param_delta_bound(double s, std::uint32_t f, std::uint32_t n,
                         std::uint32_t r) {
  check_counts(f, n);
  check_s(s);
  if (r == 0) throw std::invalid_argument("bounds: r must be >= 1");
  const double q = 1.0 - static_cast<double>(f) / n;
  return 1.0 - (1.0 - std::pow(s, r)) * std::pow(q, r);
}

double param_c(double s, std::uint32_t f, std::uint32_t n) {
  check_counts(f, n);
  check_s(s);
  return (1.0 - (f + 1.0) / n) * (1.0 - s);
}

PrivacyReport strong_adversary_bounds(std::uint32_t f, std::uint32_t n) {
  check_counts(f, n);
  return {0.0, static_cast<double>(f) / n, 0.0, Regime::strong_adversary};
}

// Same closed form as param_delta_exact: F is the only event on which the
// two sources' output probabilities can differ in the source's favour.
double p0_F(double s, std::uint32_t f, std::uint32_t n) {
  return param_delta_exact(s, f, n);
}

double MeanDynamics::p_unreached(double alpha) const {
  const double nd = n;
  return std::exp(alpha * nd * std::log1p(-1.0 / nd));
}

double mean_step(double alpha, const MeanDynamics& dyn) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("mean_step: alpha must lie in [0,1]");
  return 1.0 - dyn.p_unreached(alpha) * (1.0 - alpha * dyn.s);
}

std::optional<double> mean_fixed_point(const MeanDynamics& dyn) {
  auto gap = [&](double a) { return mean_step(a, dyn) - a; };
  double lo = 1e-9;
  double hi = 1.0;
  if (gap(lo) <= 0.0) return std::nullopt;
  if (gap(hi) >= 0.0) return hi;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double round_bound(std::uint32_t n, double s, double C) {
  if (!(s > 0.0)) throw std::invalid_argument("round_bound: s must be > 0");
  if (C < 1.0) throw std::invalid_argument("round_bound: C must be >= 1");
  return 6.0 * C * std::log(static_cast<double>(n)) / s;
}

std::vector<TradeoffRow> tradeoff_table(std::uint32_t n, std::uint32_t f,
                                        const std::vector<double>& mid_s,
                                        double epsilon) {
  check_counts(f, n);
  std::vector<TradeoffRow> rows;
  rows.push_back({Regime::standard_push, 1.0, 0.0, 1.0, param_c(1.0, f, n),
                  round_bound(n, 1.0, 1.0)});
  const double nd = n;
  rows.push_back({Regime::optimal, 0.0, epsilon, optimal_delta(epsilon, f, n),
                  optimal_c(f, n), nd * std::log(nd)});
  for (double s : mid_s) {
    if (!(s > 0.0 && s < 1.0))
      throw std::invalid_argument("tradeoff_table: intermediate s must lie in (0,1)");
    rows.push_back({Regime::parameterized, s, 0.0, param_delta_bound(s, f, n, 1),
                    param_c(s, f, n), round_bound(n, s, 1.0)});
  }
  return rows;
}

}  // namespace gossip::bounds
