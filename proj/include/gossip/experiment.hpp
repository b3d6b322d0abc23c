#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gossip/bounds.hpp"
#include "gossip/core.hpp"
#include "gossip/estimators.hpp"

namespace gossip::experiment {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Kind { spread, attack, validate, bounds, trace };

std::string_view to_string(Kind kind);
std::optional<Kind> parse_kind(std::string_view text);

/// Problem in an experiment spec, located by key and 1-based line (0 when
/// the key is missing altogether).
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string key, int line, const std::string& what);

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

/// Validated experiment description. Lists expand lexicographically in the
/// declared key order n, s, f, then the kind-specific lists.
struct ExperimentSpec {
  std::string name;
  Kind kind = Kind::spread;
  std::vector<std::uint32_t> n;
  std::vector<double> s;
  std::vector<double> f_ratio{0.1};
  std::vector<std::uint32_t> f;  ///< absolute counts; overrides f_ratio when set
  std::uint64_t trials = 1000;
  std::uint64_t master_seed = 1;
  std::string output;
  int jobs = 0;
  Variant variant = Variant::parameterized;
  std::vector<AttackSpec::Kind> attack{AttackSpec::Kind::map};
  std::vector<std::uint32_t> prior{0};
  std::vector<std::uint32_t> rumors{1};
  std::size_t k = 10;
  std::vector<std::size_t> window{0};
  std::vector<double> epsilon{0.0};
  std::uint64_t max_rounds = 0;
  std::uint64_t step_cap = 0;
  std::uint32_t source = 0;

  /// Curious counts for one n, in declaration order.
  std::vector<std::uint32_t> curious_counts(std::uint32_t n) const;

  /// Canonical key = value rendering with every default resolved (jobs is
  /// excluded: it never changes results).
  std::string to_frozen_text() const;
};

/// Parses flat `key = value` text (comma lists, `#` comments) or, when the
/// first non-blank character is `{`, a flat JSON object with the same keys.
ExperimentSpec parse_spec_text(std::string_view text);
ExperimentSpec parse_spec(const std::filesystem::path& path);

/// Overrides master_seed from GOSSIP_SEED when that variable is set.
void apply_environment(ExperimentSpec& spec);

enum class Quantity {
  first_sender_source,
  first_sender_other,
  prefix_disclosure,
  dp_gap_first_sender,
  dp_gap_rank,
  timed_first_disclosure,
  map_precision,
};

std::string_view to_string(Quantity q);

struct GridPoint {
  std::size_t index = 0;  ///< g in the stream fan-out g * 2^32 + trial
  GossipConfig config;
  std::optional<AttackSpec> attack;
  std::optional<Quantity> quantity;
  double epsilon = 0.0;
  std::vector<double> mid_s;  ///< bounds only
};

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec);

/// Quantities checked by `validate` at muting parameter s.
std::vector<Quantity> quantities_for(double s);

struct ValidationRow {
  Quantity quantity;
  double closed_form = 0.0;
  double estimate = 0.0;
  double ci = 0.0;
  std::uint64_t trials = 0;
  bool pass = false;
};

/// Runs one validation quantity at a grid point.
ValidationRow validate_point(const GridPoint& point, std::uint64_t trials,
                             std::uint64_t master_seed, const ExecutionPolicy& policy);

/// Aligned text rendering of the trade-off rows.
std::string format_tradeoff_table(std::uint32_t n, std::uint32_t f,
                                  const std::vector<bounds::TradeoffRow>& rows);

struct RunReport {
  int exit_code = 0;
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> failures;
};

/// Executes the grid and writes `<kind>.csv`, the frozen spec copy and
/// manifest.json into the output directory. Completed points are kept when
/// others fail; the exit code is nonzero iff some point failed.
RunReport run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr);

/// printf("%.10g").
std::string format_real(double x);

}  // namespace gossip::experiment
