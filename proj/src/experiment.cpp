#include "gossip/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "gossip/protocols.hpp"

namespace gossip::experiment {

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::spread:
      return "spread";
    case Kind::attack:
      return "attack";
    case Kind::validate:
      return "validate";
    case Kind::bounds:
      return "bounds";
    case Kind::trace:
      return "trace";
  }
  return "?";
}

std::optional<Kind> parse_kind(std::string_view text) {
  for (Kind k : {Kind::spread, Kind::attack, Kind::validate, Kind::bounds, Kind::trace})
    if (text == to_string(k)) return k;
  return std::nullopt;
}

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::first_sender_source:
      return "first_sender_source";
    case Quantity::first_sender_other:
      return "first_sender_other";
    case Quantity::prefix_disclosure:
      return "prefix_disclosure";
    case Quantity::dp_gap_first_sender:
      return "dp_gap_first_sender";
    case Quantity::dp_gap_rank:
      return "dp_gap_rank";
    case Quantity::timed_first_disclosure:
      return "timed_first_disclosure";
    case Quantity::map_precision:
      return "map_precision";
  }
  return "?";
}

SpecError::SpecError(std::string key, int line, const std::string& what)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : "`" + key + "`: ") + what),
      key_(std::move(key)),
      line_(line) {}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct RawValue {
  std::string text;
  int line = 0;
};
using RawMap = std::map<std::string, RawValue>;

std::string_view trim(std::string_view v) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!v.empty() && is_space(v.front())) v.remove_prefix(1);
  while (!v.empty() && is_space(v.back())) v.remove_suffix(1);
  return v;
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = v.find(',');
    out.push_back(trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

RawMap read_flat(std::string_view text) {
  RawMap raw;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw SpecError("", line_no, "expected `key = value`");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw SpecError("", line_no, "empty key");
    if (raw.count(key)) throw SpecError(key, line_no, "duplicate key");
    raw[key] = {std::string(trim(line.substr(eq + 1))), line_no};
  }
  return raw;
}

int line_of_json_key(std::string_view text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string_view::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

std::string json_scalar(const nlohmann::json& v, const std::string& key, int line) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, res.ptr);
  }
  throw SpecError(key, line, "expected a number or string");
}

RawMap read_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError("", 0, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpecError("", 1, "top-level JSON value must be an object");
  RawMap raw;
  for (const auto& [key, value] : doc.items()) {
    const int line = line_of_json_key(text, key);
    std::string joined;
    if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i].is_array() || value[i].is_object())
          throw SpecError(key, line, "nested values are not supported");
        if (i) joined += ", ";
        joined += json_scalar(value[i], key, line);
      }
    } else if (value.is_object()) {
      throw SpecError(key, line, "nested objects are not supported");
    } else {
      joined = json_scalar(value, key, line);
    }
    raw[key] = {joined, line};
  }
  return raw;
}

template <class T>
T parse_number(std::string_view token, const std::string& key, int line) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (token.empty() || res.ec != std::errc() || res.ptr != last)
    throw SpecError(key, line, "invalid number `" + std::string(token) + "`");
  return value;
}

template <class T>
std::vector<T> parse_list(const RawValue& raw, const std::string& key) {
  std::vector<T> out;
  for (auto tok : split_list(raw.text)) out.push_back(parse_number<T>(tok, key, raw.line));
  return out;
}

std::string render_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

template <class T>
std::string render_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>)
      out += render_real(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "name",    "kind",   "n",      "s",      "f_ratio", "f",          "trials",
      "master_seed", "output", "jobs", "variant", "attack", "prior",     "rumors",
      "k",       "window", "epsilon", "max_rounds", "step_cap", "source"};
  return keys;
}

ExperimentSpec build_spec(const RawMap& raw) {
  for (const auto& [key, value] : raw)
    if (!known_keys().count(key)) throw SpecError(key, value.line, "unknown key");

  auto require = [&](const std::string& key) -> const RawValue& {
    const auto it = raw.find(key);
    if (it == raw.end()) throw SpecError(key, 0, "missing required key");
    return it->second;
  };
  auto find = [&](const std::string& key) -> const RawValue* {
    const auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second;
  };
  auto line_of = [&](const std::string& key) {
    const auto* v = find(key);
    return v ? v->line : 0;
  };

  ExperimentSpec spec;

  const RawValue& name = require("name");
  spec.name = name.text;
  if (spec.name.empty() ||
      !std::all_of(spec.name.begin(), spec.name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
      }))
    throw SpecError("name", name.line, "use letters, digits, `_`, `-` or `.`");

  const RawValue& kind = require("kind");
  const auto parsed_kind = parse_kind(kind.text);
  if (!parsed_kind)
    throw SpecError("kind", kind.line, "expected spread, attack, validate, bounds or trace");
  spec.kind = *parsed_kind;

  const RawValue& n = require("n");
  for (auto v : parse_list<std::uint64_t>(n, "n")) {
    if (v < 2 || v > (1u << 30)) throw SpecError("n", n.line, "node count must lie in [2, 2^30]");
    spec.n.push_back(static_cast<std::uint32_t>(v));
  }

  if (const auto* s = find("s")) {
    spec.s = parse_list<double>(*s, "s");
    for (double v : spec.s)
      if (!(v >= 0.0 && v <= 1.0)) throw SpecError("s", s->line, "must lie in [0,1]");
    if (spec.kind == Kind::bounds)
      for (double v : spec.s)
        if (!(v > 0.0 && v < 1.0))
          throw SpecError("s", s->line, "intermediate trade-off rows need s in (0,1)");
  } else if (spec.kind != Kind::bounds) {
    throw SpecError("s", 0, "missing required key");
  }

  const auto* f_ratio = find("f_ratio");
  const auto* f_abs = find("f");
  if (f_ratio && f_abs) throw SpecError("f", f_abs->line, "give either f or f_ratio, not both");
  if (f_ratio) {
    spec.f_ratio = parse_list<double>(*f_ratio, "f_ratio");
    for (double v : spec.f_ratio)
      if (!(v >= 0.0 && v < 1.0)) throw SpecError("f_ratio", f_ratio->line, "must lie in [0,1)");
  }
  if (f_abs) {
    for (auto v : parse_list<std::uint64_t>(*f_abs, "f")) spec.f.push_back(static_cast<std::uint32_t>(v));
    spec.f_ratio.clear();
  }

  if (const auto* v = find("trials")) {
    spec.trials = parse_number<std::uint64_t>(v->text, "trials", v->line);
    if (spec.trials == 0) throw SpecError("trials", v->line, "must be >= 1");
  }
  if (const auto* v = find("master_seed"))
    spec.master_seed = parse_number<std::uint64_t>(v->text, "master_seed", v->line);
  spec.output = "out/" + spec.name;
  if (const auto* v = find("output")) {
    if (v->text.empty()) throw SpecError("output", v->line, "empty path");
    spec.output = v->text;
  }
  if (const auto* v = find("jobs")) spec.jobs = parse_number<int>(v->text, "jobs", v->line);
  if (spec.jobs < 0) throw SpecError("jobs", line_of("jobs"), "must be >= 0");

  if (const auto* v = find("variant")) {
    const auto variant = parse_variant(v->text);
    if (!variant) throw SpecError("variant", v->line, "expected parameterized or delayed_start");
    spec.variant = *variant;
    if (spec.variant == Variant::delayed_start &&
        (spec.kind == Kind::spread || spec.kind == Kind::validate))
      throw SpecError("variant", v->line, "delayed_start applies to attack and trace only");
  }
  if (const auto* v = find("attack")) {
    spec.attack.clear();
    for (auto tok : split_list(v->text)) {
      const auto a = parse_attack_kind(tok);
      if (!a) throw SpecError("attack", v->line, "unknown attack `" + std::string(tok) + "`");
      spec.attack.push_back(*a);
    }
  }
  if (const auto* v = find("prior")) spec.prior = parse_list<std::uint32_t>(*v, "prior");
  if (const auto* v = find("rumors")) {
    spec.rumors = parse_list<std::uint32_t>(*v, "rumors");
    for (auto m : spec.rumors)
      if (m == 0) throw SpecError("rumors", v->line, "must be >= 1");
  }
  if (const auto* v = find("k")) {
    spec.k = parse_number<std::size_t>(v->text, "k", v->line);
    if (spec.k == 0) throw SpecError("k", v->line, "must be >= 1");
  }
  if (const auto* v = find("window")) spec.window = parse_list<std::size_t>(*v, "window");
  if (const auto* v = find("epsilon")) {
    spec.epsilon = parse_list<double>(*v, "epsilon");
    for (double e : spec.epsilon)
      if (!(e >= 0.0)) throw SpecError("epsilon", v->line, "must be >= 0");
  }
  if (const auto* v = find("max_rounds"))
    spec.max_rounds = parse_number<std::uint64_t>(v->text, "max_rounds", v->line);
  if (const auto* v = find("step_cap"))
    spec.step_cap = parse_number<std::uint64_t>(v->text, "step_cap", v->line);
  if (const auto* v = find("source"))
    spec.source = parse_number<std::uint32_t>(v->text, "source", v->line);

  const std::string f_key = spec.f.empty() ? "f_ratio" : "f";
  for (std::uint32_t nodes : spec.n) {
    for (std::uint32_t f : spec.curious_counts(nodes)) {
      if (f + 2 > nodes)
        throw SpecError(f_key, line_of(f_key),
                        "needs at most n-2 curious nodes (n=" + std::to_string(nodes) + ")");
      if (spec.source >= nodes - f)
        throw SpecError("source", line_of("source"),
                        "source must be a non-curious node (n=" + std::to_string(nodes) +
                            ", f=" + std::to_string(f) + ")");
    }
  }

  if (spec.kind == Kind::trace) {
    for (const char* key : {"n", "s", "f_ratio", "f"})
      if (const auto* v = find(key); v && split_list(v->text).size() != 1)
        throw SpecError(key, v->line, "trace dumps a single run; give one value");
  }
  return spec;
}

}  // namespace

std::vector<std::uint32_t> ExperimentSpec::curious_counts(std::uint32_t nodes) const {
  if (!f.empty()) return f;
  std::vector<std::uint32_t> out;
  for (double r : f_ratio) out.push_back(curious_count(nodes, r));
  return out;
}

std::string ExperimentSpec::to_frozen_text() const {
  std::ostringstream out;
  out << "# frozen experiment spec, defaults resolved\n";
  out << "name = " << name << '\n';
  out << "kind = " << to_string(kind) << '\n';
  out << "n = " << render_list(n) << '\n';
  if (!s.empty()) out << "s = " << render_list(s) << '\n';
  if (f.empty())
    out << "f_ratio = " << render_list(f_ratio) << '\n';
  else
    out << "f = " << render_list(f) << '\n';
  out << "trials = " << trials << '\n';
  out << "master_seed = " << master_seed << '\n';
  out << "output = " << output << '\n';
  out << "variant = " << to_string(variant) << '\n';
  out << "attack = ";
  for (std::size_t i = 0; i < attack.size(); ++i)
    out << (i ? ", " : "") << gossip::to_string(attack[i]);
  out << '\n';
  out << "prior = " << render_list(prior) << '\n';
  out << "rumors = " << render_list(rumors) << '\n';
  out << "k = " << k << '\n';
  out << "window = " << render_list(window) << '\n';
  out << "epsilon = " << render_list(epsilon) << '\n';
  out << "max_rounds = " << max_rounds << '\n';
  out << "step_cap = " << step_cap << '\n';
  out << "source = " << source << '\n';
  return out.str();
}

ExperimentSpec parse_spec_text(std::string_view text) {
  const std::string_view body = trim(text);
  const RawMap raw = (!body.empty() && body.front() == '{') ? read_json(text) : read_flat(text);
  return build_spec(raw);
}

ExperimentSpec parse_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("", 0, "cannot open spec file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

void apply_environment(ExperimentSpec& spec) {
  if (const char* seed = std::getenv("GOSSIP_SEED"); seed && *seed)
    spec.master_seed = parse_number<std::uint64_t>(seed, "GOSSIP_SEED", 0);
}

// ---------------------------------------------------------------------------
// Grid

std::vector<Quantity> quantities_for(double s) {
  if (s == 0.0)
    return {Quantity::first_sender_source, Quantity::first_sender_other,
            Quantity::dp_gap_first_sender, Quantity::timed_first_disclosure,
            Quantity::map_precision};
  // at s = 1 the source never mutes, so the prefix only ends with the run
  if (s == 1.0)
    return {Quantity::dp_gap_rank, Quantity::timed_first_disclosure, Quantity::map_precision};
  return {Quantity::prefix_disclosure, Quantity::dp_gap_rank,
          Quantity::timed_first_disclosure, Quantity::map_precision};
}

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
  std::vector<GridPoint> grid;
  auto make = [&](std::uint32_t n, double s, std::uint32_t f) {
    GossipConfig cfg;
    cfg.n = n;
    cfg.f = f;
    cfg.s = s;
    cfg.source = NodeId{spec.source};
    cfg.variant = spec.variant;
    if (spec.step_cap) cfg.step_cap = spec.step_cap;
    cfg.validate();
    return cfg;
  };
  auto push = [&](GridPoint p) {
    p.index = grid.size();
    grid.push_back(std::move(p));
  };

  if (spec.kind == Kind::bounds) {
    for (std::uint32_t n : spec.n)
      for (std::uint32_t f : spec.curious_counts(n))
        for (double eps : spec.epsilon) {
          GridPoint p;
          p.config = make(n, 1.0, f);
          p.epsilon = eps;
          if (!spec.s.empty()) {
            p.mid_s = spec.s;
          } else if (f > 0) {
            p.mid_s = {static_cast<double>(f) / n};
          }
          push(std::move(p));
        }
    return grid;
  }

  for (std::uint32_t n : spec.n)
    for (double s : spec.s)
      for (std::uint32_t f : spec.curious_counts(n)) {
        const GossipConfig cfg = make(n, s, f);
        switch (spec.kind) {
          case Kind::spread:
          case Kind::trace:
            push({0, cfg, std::nullopt, std::nullopt, 0.0, {}});
            break;
          case Kind::attack:
            for (auto kind : spec.attack) {
              if (kind == AttackSpec::Kind::map) {
                for (auto size : spec.prior) push({0, cfg, AttackSpec::map(size), std::nullopt, 0.0, {}});
              } else if (kind == AttackSpec::Kind::multi_rumor) {
                for (auto m : spec.rumors)
                  push({0, cfg, AttackSpec::multi_rumor(m, spec.k), std::nullopt, 0.0, {}});
              } else {
                for (auto r : spec.window) push({0, cfg, AttackSpec::silence(r), std::nullopt, 0.0, {}});
              }
            }
            break;
          case Kind::validate:
            for (Quantity q : quantities_for(s)) push({0, cfg, std::nullopt, q, 0.0, {}});
            break;
          case Kind::bounds:
            break;
        }
      }
  return grid;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool within(double estimate, double closed_form, double ci) {
  return std::abs(estimate - closed_form) <= 3.0 * ci + 1e-12;
}

bool at_most(double estimate, double closed_form, double ci) {
  return estimate <= closed_form + 3.0 * ci + 1e-12;
}

NodeId other_honest(const GossipConfig& cfg) {
  return NodeId{cfg.source.value == 0 ? 1u : 0u};
}

}  // namespace

ValidationRow validate_point(const GridPoint& point, std::uint64_t trials,
                             std::uint64_t master_seed, const ExecutionPolicy& policy) {
  if (!point.quantity) throw std::invalid_argument("validate_point: no quantity");
  const GossipConfig& cfg = point.config;
  const RngStream rng(master_seed, point.index);
  const double n = cfg.n;
  const double f = cfg.f;

  ValidationRow row;
  row.quantity = *point.quantity;
  row.trials = trials;
  switch (*point.quantity) {
    case Quantity::first_sender_source: {
      const auto est = estimate_event(cfg, EventSpec::first_sender_is_source(), trials, rng, policy);
      row.closed_form = (f + 1) / n;
      row.estimate = est.estimate;
      row.ci = est.ci_half_width;
      row.pass = within(row.estimate, row.closed_form, row.ci);
      break;
    }
    case Quantity::first_sender_other: {
      const auto est =
          estimate_event(cfg, EventSpec::first_sender_is(other_honest(cfg)), trials, rng, policy);
      row.closed_form = 1.0 / n;
      row.estimate = est.estimate;
      row.ci = est.ci_half_width;
      row.pass = within(row.estimate, row.closed_form, row.ci);
      break;
    }
    case Quantity::prefix_disclosure: {
      const auto est = estimate_prefix_disclosure(cfg, trials, rng, policy);
      row.closed_form = bounds::p0_F(cfg.s, cfg.f, cfg.n);
      row.estimate = est.estimate;
      row.ci = est.ci_half_width;
      row.pass = within(row.estimate, row.closed_form, row.ci);
      break;
    }
    case Quantity::dp_gap_first_sender: {
      std::vector<EventSpec> family;
      for (NodeId k : cfg.honest_nodes()) family.push_back(EventSpec::first_sender_is(k));
      GossipConfig other = cfg;
      other.source = other_honest(cfg);
      const auto gap = estimate_dp_gap(cfg, other, family, trials, rng, policy);
      row.closed_form = bounds::optimal_delta(0.0, cfg.f, cfg.n);
      row.estimate = gap.gap;
      row.ci = gap.ci_half_width();
      row.pass = within(row.estimate, row.closed_form, row.ci);
      break;
    }
    case Quantity::dp_gap_rank: {
      const std::vector<EventSpec> family{EventSpec::first_sender_is_source(),
                                          EventSpec::source_rank_le(1),
                                          EventSpec::source_rank_le(10)};
      GossipConfig other = cfg;
      other.source = other_honest(cfg);
      const auto gap = estimate_dp_gap(cfg, other, family, trials, rng, policy);
      row.closed_form = bounds::param_delta_exact(cfg.s, cfg.f, cfg.n);
      row.estimate = gap.gap;
      row.ci = gap.ci_half_width();
      row.pass = at_most(row.estimate, row.closed_form, row.ci);
      break;
    }
    case Quantity::timed_first_disclosure: {
      const auto est =
          estimate_event(cfg, EventSpec::timed_first_disclosure(), trials, rng, policy);
      row.closed_form = bounds::strong_adversary_bounds(cfg.f, cfg.n).delta;
      row.estimate = est.estimate;
      row.ci = est.ci_half_width;
      row.pass = within(row.estimate, row.closed_form, row.ci);
      break;
    }
    case Quantity::map_precision: {
      const auto est = estimate_attack_precision(cfg, AttackSpec::map(0), trials, rng, policy);
      const double c = cfg.s == 0.0 ? bounds::optimal_c(cfg.f, cfg.n)
                                    : bounds::param_c(cfg.s, cfg.f, cfg.n);
      row.closed_form = 1.0 / (1.0 + c);
      row.estimate = est.precision.estimate;
      row.ci = est.precision.ci_half_width;
      row.pass = cfg.s == 0.0 ? within(row.estimate, row.closed_form, row.ci)
                              : at_most(row.estimate, row.closed_form, row.ci);
      break;
    }
  }
  return row;
}

// ---------------------------------------------------------------------------
// Rendering

std::string format_tradeoff_table(std::uint32_t n, std::uint32_t f,
                                  const std::vector<bounds::TradeoffRow>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "n = %u, f = %u (f/n = %.4g)\n", n, f,
                static_cast<double>(f) / n);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-15s %10s %10s %14s %14s %16s\n", "regime", "s", "epsilon",
                "delta", "c", "spreading_bound");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-15s %10.6g %10.6g %14.10g %14.10g %16.10g\n",
                  std::string(bounds::to_string(r.regime)).c_str(), r.s, r.epsilon, r.delta,
                  r.c, r.spreading_bound);
    out << buf;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::string describe(const GridPoint& p) {
  std::ostringstream out;
  out << "point " << p.index << " (n=" << p.config.n << ", s=" << format_real(p.config.s)
      << ", f=" << p.config.f;
  if (p.attack)
    out << ", attack=" << to_string(p.attack->kind)
        << ", param=" << p.attack->parameter(p.config.n, p.config.f);
  if (p.quantity) out << ", quantity=" << to_string(*p.quantity);
  out << ")";
  return out.str();
}

template <class T>
std::string quantile_cell(const std::vector<T>& values, double q) {
  if (values.empty()) return "";
  std::vector<double> sample(values.begin(), values.end());
  return format_real(quantile(std::move(sample), q));
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::string_view header) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  std::ofstream& stream() { return out_; }

 private:
  std::ofstream out_;
};

}  // namespace

RunReport run_experiment(const ExperimentSpec& spec, std::ostream* log) {
  const auto started = std::chrono::steady_clock::now();
  RunReport report;
  report.output_dir = spec.output;
  std::filesystem::create_directories(report.output_dir);

  {
    const auto frozen = report.output_dir / "spec.frozen.cfg";
    std::ofstream out(frozen, std::ios::binary);
    out << spec.to_frozen_text();
    report.files.push_back(frozen);
  }

  const ExecutionPolicy policy{true, spec.jobs};
  const auto grid = expand_grid(spec);
  auto note = [&](const std::string& line) {
    if (log) *log << line << '\n' << std::flush;
  };
  auto fail = [&](const GridPoint& p, const std::string& why) {
    report.failures.push_back(describe(p) + ": " + why);
    note("FAILED " + report.failures.back());
  };

  const auto csv_path = report.output_dir / (std::string(to_string(spec.kind)) + ".csv");
  switch (spec.kind) {
    case Kind::bounds: {
      CsvFile csv(csv_path, "regime,s,f,n,epsilon,delta,c,spreading_bound");
      for (const auto& p : grid) {
        try {
          const auto rows = bounds::tradeoff_table(p.config.n, p.config.f, p.mid_s, p.epsilon);
          for (const auto& r : rows)
            csv.stream() << bounds::to_string(r.regime) << ',' << format_real(r.s) << ','
                         << p.config.f << ',' << p.config.n << ',' << format_real(r.epsilon) << ','
                         << format_real(r.delta) << ',' << format_real(r.c) << ','
                         << format_real(r.spreading_bound) << '\n';
          note(format_tradeoff_table(p.config.n, p.config.f, rows));
        } catch (const std::exception& e) {
          fail(p, e.what());
        }
      }
      break;
    }
    case Kind::spread: {
      CsvFile csv(csv_path,
                  "n,s,f,round,informed_med,informed_p10,informed_p90,active_med,active_p10,"
                  "active_p90");
      const auto completion_path = report.output_dir / "spread_completion.csv";
      CsvFile completion(completion_path,
                         "n,s,f,trials,capped,completion_med,completion_p10,completion_p90,"
                         "messages_med,messages_p10,messages_p90,late_active_mean");
      report.files.push_back(completion_path);
      SpreadOptions options;
      options.max_rounds = spec.max_rounds;
      for (const auto& p : grid) {
        try {
          const auto summary = estimate_spreading(p.config, spec.trials,
                                                  RngStream(spec.master_seed, p.index), options, policy);
          const auto prefix = std::to_string(p.config.n) + ',' + format_real(p.config.s) + ',' +
                              std::to_string(p.config.f) + ',';
          for (const auto& r : summary.trajectory)
            csv.stream() << prefix << r.round << ',' << format_real(r.informed_med) << ','
                         << format_real(r.informed_p10) << ',' << format_real(r.informed_p90) << ','
                         << format_real(r.active_med) << ',' << format_real(r.active_p10) << ','
                         << format_real(r.active_p90) << '\n';
          std::string late;
          if (!summary.late_active.empty())
            late = format_real(std::accumulate(summary.late_active.begin(),
                                               summary.late_active.end(), 0.0) /
                               summary.late_active.size());
          completion.stream() << prefix << summary.trials << ',' << summary.capped << ','
                              << quantile_cell(summary.completion_rounds, 0.5) << ','
                              << quantile_cell(summary.completion_rounds, 0.1) << ','
                              << quantile_cell(summary.completion_rounds, 0.9) << ','
                              << quantile_cell(summary.total_messages, 0.5) << ','
                              << quantile_cell(summary.total_messages, 0.1) << ','
                              << quantile_cell(summary.total_messages, 0.9) << ',' << late << '\n';
          note(describe(p) + " done");
        } catch (const std::exception& e) {
          fail(p, e.what());
        }
      }
      break;
    }
    case Kind::attack: {
      CsvFile csv(csv_path, "n,s,f,attack,param,trials,precision,ci,abstain_rate");
      for (const auto& p : grid) {
        try {
          const auto result = estimate_attack_precision(
              p.config, *p.attack, spec.trials, RngStream(spec.master_seed, p.index), policy);
          csv.stream() << p.config.n << ',' << format_real(p.config.s) << ',' << p.config.f << ','
                       << to_string(p.attack->kind) << ','
                       << p.attack->parameter(p.config.n, p.config.f) << ',' << spec.trials << ','
                       << format_real(result.precision.estimate) << ','
                       << format_real(result.precision.ci_half_width) << ','
                       << format_real(result.abstain_rate()) << '\n';
          note(describe(p) + " precision " + format_real(result.precision.estimate));
        } catch (const std::exception& e) {
          fail(p, e.what());
        }
      }
      break;
    }
    case Kind::validate: {
      CsvFile csv(csv_path, "quantity,s,f,n,closed_form,estimate,ci,trials,pass");
      for (const auto& p : grid) {
        try {
          const auto row = validate_point(p, spec.trials, spec.master_seed, policy);
          csv.stream() << to_string(row.quantity) << ',' << format_real(p.config.s) << ','
                       << p.config.f << ',' << p.config.n << ',' << format_real(row.closed_form)
                       << ',' << format_real(row.estimate) << ',' << format_real(row.ci) << ','
                       << row.trials << ',' << (row.pass ? "true" : "false") << '\n';
          if (!row.pass)
            fail(p, "estimate " + format_real(row.estimate) + " inconsistent with closed form " +
                        format_real(row.closed_form));
          else
            note(describe(p) + " ok");
        } catch (const std::exception& e) {
          fail(p, e.what());
        }
      }
      break;
    }
    case Kind::trace: {
      for (const auto& p : grid) {
        try {
          RngStream rng = RngStream(spec.master_seed, p.index).trial(0);
          const auto trace = run_protocol(p.config, rng);
          std::ofstream out(csv_path, std::ios::binary);
          write_trace_csv(out, trace);
          note(describe(p) + " " + std::to_string(trace.events.size()) + " events, " +
               std::string(gossip::to_string(trace.status)));
        } catch (const std::exception& e) {
          fail(p, e.what());
        }
      }
      break;
    }
  }
  report.files.push_back(csv_path);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  nlohmann::ordered_json manifest;
  manifest["name"] = spec.name;
  manifest["kind"] = std::string(to_string(spec.kind));
  manifest["version"] = std::string(kVersion);
  manifest["master_seed"] = spec.master_seed;
  manifest["grid_points"] = grid.size();
  manifest["jobs"] = spec.jobs > 0 ? spec.jobs : available_workers();
  if (spec.kind == Kind::spread)
    manifest["round_semantics"] = "synchronous engine rounds for every s";
  manifest["spec"] = spec.to_frozen_text();
  std::vector<std::string> files;
  for (const auto& f : report.files) files.push_back(f.filename().string());
  manifest["files"] = files;
  manifest["failures"] = report.failures;
  manifest["wall_clock_seconds"] = seconds;
  const auto manifest_path = report.output_dir / "manifest.json";
  std::ofstream(manifest_path, std::ios::binary) << manifest.dump(2) << '\n';
  report.files.push_back(manifest_path);

  report.exit_code = report.failures.empty() ? 0 : 1;
  return report;
}

}  // namespace gossip::experiment
