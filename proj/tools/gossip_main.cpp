// gossip: command-line front end for the experiment grid runner.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "gossip/bounds.hpp"
#include "gossip/experiment.hpp"

namespace ex = gossip::experiment;

namespace {

// Flag values gathered into spec text so flags and spec files share one
// parser and one set of error messages.
struct FlagSpec {
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  std::string text(const std::string& kind) const {
    std::string out = "kind = " + kind + "\n";
    if (!values.count("name")) out += "name = " + kind + "\n";
    for (const auto& [k, v] : values) out += k + " = " + v + "\n";
    return out;
  }
};

void add_common(CLI::App* app, FlagSpec& flags) {
  flags.add(app, "--name", "name", "experiment name (default: the subcommand)");
  flags.add(app, "-n,--n", "n", "node counts, comma separated");
  flags.add(app, "-s,--s", "s", "muting parameters in [0,1], comma separated");
  flags.add(app, "--f-ratio", "f_ratio", "curious fractions f/n (default 0.1)");
  flags.add(app, "-f,--f", "f", "absolute curious counts (overrides --f-ratio)");
  flags.add(app, "--trials", "trials", "trials per grid point (default 1000)");
  flags.add(app, "--seed", "master_seed", "master seed (default 1)");
  flags.add(app, "-o,--output", "output", "output directory (default out/<name>)");
  flags.add(app, "--source", "source", "source node id (default 0)");
  flags.add(app, "--step-cap", "step_cap", "tell_gossip cap per run (default ceil(50 n ln n))");
}

int execute(ex::ExperimentSpec spec, std::optional<int> jobs) {
  ex::apply_environment(spec);
  if (jobs) spec.jobs = *jobs;
  const auto report = ex::run_experiment(spec, &std::cerr);
  std::cout << "wrote " << report.output_dir.string() << " (" << report.files.size()
            << " files)\n";
  for (const auto& f : report.failures) std::cout << "failed: " << f << '\n';
  return report.exit_code;
}

void print_bounds_csv(std::ostream& out, const std::vector<gossip::bounds::TradeoffRow>& rows) {
  out << "regime,s,delta,spreading_bound\n";
  for (const auto& r : rows)
    out << gossip::bounds::to_string(r.regime) << ',' << ex::format_real(r.s) << ','
        << ex::format_real(r.delta) << ',' << ex::format_real(r.spreading_bound) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-anonymity experiments for parameterized gossip"};
  app.set_version_flag("--version", std::string(ex::kVersion));
  app.require_subcommand(1);

  std::optional<int> jobs;
  app.add_option("--jobs", jobs, "worker pool size (default: available cores)")
      ->check(CLI::NonNegativeNumber);

  // run SPEC
  std::string spec_path;
  auto* run = app.add_subcommand("run", "execute a spec file (key = value or JSON)");
  run->add_option("spec", spec_path, "spec file")->required()->check(CLI::ExistingFile);

  // one subcommand per experiment kind, driven by flags
  std::map<std::string, FlagSpec> flags;
  std::map<std::string, CLI::App*> kinds;
  const std::map<std::string, std::string> blurbs{
      {"trace", "dump one run as step,sender,receiver"},
      {"spread", "dissemination trajectories on the synchronous engine"},
      {"attack", "source-inference attack precision"},
      {"validate", "Monte Carlo estimates against closed forms"},
  };
  for (const auto& [kind, blurb] : blurbs) {
    auto* sub = app.add_subcommand(kind, blurb);
    add_common(sub, flags[kind]);
    kinds[kind] = sub;
  }
  flags["trace"].add(kinds["trace"], "--variant", "variant", "parameterized or delayed_start");
  flags["attack"].add(kinds["attack"], "--variant", "variant", "parameterized or delayed_start");
  flags["spread"].add(kinds["spread"], "--max-rounds", "max_rounds", "round cap per run (0 = none)");
  flags["attack"].add(kinds["attack"], "--attack", "attack", "map, multi_rumor, silence (comma list)");
  flags["attack"].add(kinds["attack"], "--prior", "prior", "map prior sizes (0 = all non-curious)");
  flags["attack"].add(kinds["attack"], "--rumors", "rumors", "multi_rumor instance counts m");
  flags["attack"].add(kinds["attack"], "--k", "k", "multi_rumor distinct senders per instance");
  flags["attack"].add(kinds["attack"], "--window", "window", "silence window r (0 = ceil(ln^2 n))");

  // bounds prints the trade-off table directly
  std::uint32_t bounds_n = 0;
  std::optional<std::uint32_t> bounds_f;
  std::optional<double> bounds_ratio;
  std::vector<double> bounds_s;
  double bounds_eps = 0.0;
  std::string bounds_output;
  auto* bounds = app.add_subcommand("bounds", "print the privacy/speed trade-off rows");
  bounds->add_option("-n,--n", bounds_n, "node count")->required()->check(CLI::Range(2u, 1u << 30));
  auto* f_opt = bounds->add_option("-f,--f", bounds_f, "curious count");
  bounds->add_option("--f-ratio", bounds_ratio, "curious fraction f/n")->excludes(f_opt);
  bounds->add_option("-s,--s", bounds_s, "intermediate muting parameters (default f/n)")
      ->delimiter(',');
  bounds->add_option("--epsilon", bounds_eps, "epsilon for the optimal row (default 0)");
  bounds->add_option("-o,--output", bounds_output, "also write bounds.csv and a manifest here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return execute(ex::parse_spec(spec_path), jobs);

    for (const auto& [kind, sub] : kinds)
      if (sub->parsed()) return execute(ex::parse_spec_text(flags[kind].text(kind)), jobs);

    if (bounds->parsed()) {
      std::string text = "kind = bounds\nname = bounds\nn = " + std::to_string(bounds_n) + "\n";
      if (bounds_f) text += "f = " + std::to_string(*bounds_f) + "\n";
      if (bounds_ratio) text += "f_ratio = " + ex::format_real(*bounds_ratio) + "\n";
      if (!bounds_s.empty()) {
        text += "s = ";
        for (std::size_t i = 0; i < bounds_s.size(); ++i)
          text += (i ? ", " : "") + ex::format_real(bounds_s[i]);
        text += "\n";
      }
      text += "epsilon = " + ex::format_real(bounds_eps) + "\n";
      if (!bounds_output.empty()) text += "output = " + bounds_output + "\n";
      auto spec = ex::parse_spec_text(text);
      for (const auto& point : ex::expand_grid(spec)) {
        const auto rows = gossip::bounds::tradeoff_table(point.config.n, point.config.f,
                                                         point.mid_s, point.epsilon);
        std::cout << ex::format_tradeoff_table(point.config.n, point.config.f, rows) << '\n';
        print_bounds_csv(std::cout, rows);
      }
      if (!bounds_output.empty()) return ex::run_experiment(spec).exit_code;
      return 0;
    }
  } catch (const ex::SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
