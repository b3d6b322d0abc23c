#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gossip::bounds {

enum class Regime {
  optimal,             ///< s = 0, optimal among all gossip protocols
  parameterized,       ///< 0 < s < 1
  standard_push,       ///< s = 1
  strong_adversary,    ///< globally timed observations
};

std::string_view to_string(Regime r);

struct PrivacyReport {
  double epsilon = 0.0;
  double delta = 0.0;
  double c = 0.0;  ///< prediction uncertainty; attack success <= 1/(1+c)
  Regime regime = Regime::optimal;
};

/// max(0, (f/n)(1 - (e^eps - 1)/f)); zero when f = 0.
double optimal_delta(double epsilon, std::uint32_t f, std::uint32_t n);

/// n/(f+1) - 1.
double optimal_c(std::uint32_t f, std::uint32_t n);

/// 1 - (1-s)(1-f/n)/(1 - s(1-f/n)); 1 at s = 1.
double param_delta_exact(double s, std::uint32_t f, std::uint32_t n);

/// 1 - (1 - s^r)(1 - f/n)^r.
double param_delta_bound(double s, std::uint32_t f, std::uint32_t n,
                         std::uint32_t r);

/// (1 - (f+1)/n)(1 - s).
double param_c(double s, std::uint32_t f, std::uint32_t n);

/// delta = f/n, c = 0.
PrivacyReport strong_adversary_bounds(std::uint32_t f, std::uint32_t n);

/// Probability that the source reaches a curious node before it first mutes:
/// sum_k (1-s) s^k (1 - (1-f/n)^(k+1)), limits f/n at s = 0 and 1 at s = 1.
double p0_F(double s, std::uint32_t f, std::uint32_t n);

/// Expected next-round active fraction of the synchronous engine.
struct MeanDynamics {
  double s = 1.0;
  std::uint32_t n = 2;

  /// (1 - 1/n)^(alpha n)
  double p_unreached(double alpha) const;
  /// s / (1 + 2s)
  double alpha_s() const { return s / (1.0 + 2.0 * s); }
};

/// 1 - (1 - 1/n)^(alpha n) (1 - alpha s)
double mean_step(double alpha, const MeanDynamics& dyn);

/// Root of mean_step(alpha) = alpha on (0, 1] by bisection to 1e-10;
/// nullopt when the bracket shows no sign change. At s = 0 the root sits
/// near 1/n, the single active node.
std::optional<double> mean_fixed_point(const MeanDynamics& dyn);

/// 6 C ln(n) / s.
double round_bound(std::uint32_t n, double s, double C);

/// One row of the privacy/speed trade-off table.
struct TradeoffRow {
  Regime regime;
  double s;
  double epsilon;
  double delta;
  double c;
  double spreading_bound;  ///< rounds; for s = 0 a round is one message
};

/// Rows for s = 1, s = 0 and each intermediate s in `mid_s`, at privacy
/// level `epsilon` (only the s = 0 row trades epsilon against delta).
std::vector<TradeoffRow> tradeoff_table(std::uint32_t n, std::uint32_t f,
                                        const std::vector<double>& mid_s,
                                        double epsilon = 0.0);

}  // namespace gossip::bounds
