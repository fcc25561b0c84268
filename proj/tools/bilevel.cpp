#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bilevel/errors.hpp"
#include "bilevel/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  int jobs = 1;
  bool force = false;
  std::optional<std::uint64_t> sample_seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (or a manifest to re-run)")->required();
  cmd->add_option("--set", c.sets, "override, path=value (repeatable)");
  cmd->add_option("--jobs", c.jobs, "concurrent cells")->check(CLI::PositiveNumber);
  cmd->add_flag("--force", c.force, "overwrite an existing output directory");
  cmd->add_option("--sample-seed", c.sample_seed, "draw sweep values at random with this seed");
}

bilevel::ExperimentConfig load(const Common& c) {
  return bilevel::parse_config(bilevel::apply_overrides(bilevel::load_config_file(c.config), c.sets),
                               c.sample_seed);
}

bilevel::BatchOptions batch_options(const Common& c) {
  bilevel::BatchOptions o;
  o.jobs = c.jobs;
  o.force = c.force;
  o.log = &std::cerr;
  return o;
}

int failures(const bilevel::Json& entries) {
  int n = 0;
  for (const auto& e : entries) n += e.value("status", "") != "ok";
  return n;
}

int finish(const bilevel::Json& entries, const char* what) {
  const int failed = failures(entries);
  std::cerr << entries.size() << " " << what << ", " << failed << " failed\n";
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tikhonov-regularized proximal gradient methods for simple bilevel problems"};
  app.require_subcommand(1);
  Common run_opts, cmp_opts, flow_opts;
  std::string report_dir;
  auto* run = app.add_subcommand("run", "run every (method x sweep value) cell");
  add_common(run, run_opts);
  auto* compare = app.add_subcommand("compare", "merged traces and plot data");
  add_common(compare, cmp_opts);
  auto* flow = app.add_subcommand("flow", "integrate the continuous-time flows");
  add_common(flow, flow_opts);
  auto* rep = app.add_subcommand("report", "summarize an output directory");
  rep->add_option("output_dir", report_dir, "directory holding manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const auto cfg = load(run_opts);
      const auto manifest = bilevel::run_batch(cfg, batch_options(run_opts));
      std::cout << (cfg.output_dir / "manifest.json").string() << "\n";
      return finish(manifest.at("runs"), "runs");
    }
    if (*compare) {
      const auto cfg = load(cmp_opts);
      bilevel::compare_batch(cfg, batch_options(cmp_opts));
      std::cout << (cfg.output_dir / "compare" / "compare.csv").string() << "\n";
      return 0;
    }
    if (*flow) {
      const auto cfg = load(flow_opts);
      const auto manifest = bilevel::flow_batch(cfg, batch_options(flow_opts));
      std::cout << (cfg.output_dir / "flow_manifest.json").string() << "\n";
      return finish(manifest.at("flows"), "flows");
    }
    bilevel::report(report_dir, std::cout);
    return 0;
  } catch (const bilevel::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
