#include "bilevel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "bilevel/diagnostics.hpp"
#include "bilevel/svg.hpp"
#include "bilevel/trace_io.hpp"

#ifndef BILEVEL_GIT_HASH
#define BILEVEL_GIT_HASH "unknown"
#endif

namespace bilevel {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kFlowManifest = "flow_manifest.json";

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json schedule_json(const Schedule& s) {
  if (s.vanishing_off) return Json{{"zero", true}};
  return Json{{"c", s.c}, {"delta", s.delta}, {"beta", s.beta}};
}

std::string cell_id(const std::string& label, const std::string& parameter,
                    const std::optional<double>& value) {
  if (!value) return label;
  return label + "_" + parameter + "_" + format_double(*value);
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

void log_line(const BatchOptions& options, std::mutex& mu, const std::string& line) {
  if (!options.log) return;
  std::lock_guard<std::mutex> lock(mu);
  *options.log << line << '\n';
}

Json fit_json(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    const RateFit fit = fit_loglog(x, y);
    return Json{{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"points", fit.points}};
  } catch (const Error& e) {
    return Json{{"error", e.what()}};
  }
}

std::pair<long long, long long> last_decade(long long k_max) {
  return {std::max<long long>(1, k_max / 10), k_max};
}

Json trace_fits(const RunTrace& trace, std::pair<long long, long long> window) {
  Json out = Json::object();
  out["window"] = {window.first, window.second};
  for (TraceField f : {TraceField::F_res, TraceField::AbsH_gap, TraceField::Dist}) {
    std::vector<double> ks, vs;
    for (const auto& r : trace.records) {
      if (r.k < window.first || r.k > window.second || r.k <= 0) continue;
      ks.push_back(static_cast<double>(r.k));
      vs.push_back(field_value(r, f));
    }
    out[trace_field_name(f)] = fit_json(ks, vs);
  }
  return out;
}

struct EnergySetup {
  Order order;
  Schedule sched;
  LyapunovParams params;
};

std::optional<EnergySetup> energy_setup(const BilevelProblem& prob, const SolverConfig& solver) {
  if (solver.method == Method::BPG) {
    EnergySetup s{Order::First, solver.schedule, {}};
    s.params.theta = resolved_step(solver, prob);
    s.params.gamma = solver.gamma;
    s.params.lambda = default_lambda(Order::First, solver.alpha);
    return s;
  }
  if (is_second_order(solver.method)) {
    const SolverConfig eff = solver.method == Method::FBiPG ? fbipg_as_bfpg(solver) : solver;
    EnergySetup s{Order::Second, eff.schedule, {}};
    s.params.theta = std::sqrt(resolved_step(solver, prob));
    s.params.gamma = eff.gamma;
    s.params.alpha = eff.alpha;
    s.params.lambda = default_lambda(Order::Second, eff.alpha);
    return s;
  }
  return std::nullopt;
}

Json run_diagnostics(const BilevelProblem& prob, const ExperimentConfig& cfg, const RunCell& cell,
                     const RunTrace& trace) {
  Json d = Json::object();
  if (trace.records.empty()) return d;
  const TraceRecord& last = trace.records.back();
  d["final"] = {{"k", last.k},
                {"F_res", number_or_null(last.F_res)},
                {"H_gap", number_or_null(last.H_gap)},
                {"dist", number_or_null(last.dist)}};
  if (!trace.records.empty() && std::isfinite(trace.records.front().dist)) {
    d["initial_dist"] = trace.records.front().dist;
  }
  d["fit"] = trace_fits(trace, cfg.diagnostics.fit_window.value_or(last_decade(last.k)));

  const bool has_x_star = prob.oracle && prob.oracle->x_star;
  const auto setup = energy_setup(prob, cell.solver);
  if (cfg.diagnostics.dissipation && has_x_star && setup) {
    try {
      const DissipationReport rep =
          setup->order == Order::First
              ? check_dissipation_first(prob, setup->sched, setup->params, trace)
              : check_dissipation_second(prob, setup->sched, setup->params, trace);
      d["dissipation"] = {{"k0", rep.k0},
                          {"violations", rep.violations},
                          {"worst_slack", number_or_null(rep.worst_slack)},
                          {"lambda", setup->params.lambda}};
    } catch (const Error& e) {
      d["dissipation"] = {{"error", e.what()}};
    }
  }
  if (cfg.diagnostics.best_iterate && setup && trace.last_iterate_index() >= 2) {
    try {
      const long long k = trace.last_iterate_index() - 1;
      const BestIterate best = best_iterate(prob, trace, setup->sched, setup->params, setup->order, k, 1);
      d["best_iterate"] = {{"k", k},
                           {"which", best.which},
                           {"H_best", prob.outer_value(best.x_best)},
                           {"H_last", prob.outer_value(trace.iterate(k + 1))}};
    } catch (const Error& e) {
      d["best_iterate"] = {{"error", e.what()}};
    }
  }
  return d;
}

fs::path resolve_data_path(const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : data_dir() / path;
}

Json reference_key(const BilevelProblem& prob, const ReferenceSpec& spec) {
  return Json{{"problem_id", prob.id},
              {"iterations", spec.iterations},
              {"schedule", schedule_json(spec.schedule)},
              {"alpha", spec.alpha},
              {"gamma", spec.gamma},
              {"step_fraction", spec.step_fraction}};
}

void require_writable_dir(const fs::path& dir, const fs::path& manifest, bool force) {
  if (fs::exists(manifest) && !force) {
    throw ValidationError("output_dir", "'" + dir.string() +
                                            "' already holds " + manifest.filename().string() +
                                            "; pass --force to overwrite");
  }
}

std::string fmt(double v, const char* spec = "%.3f") {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string bare_message(const ValidationError& e) {
  const std::string what = e.what();
  const std::string prefix = e.path() + ": ";
  return !e.path().empty() && what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

Json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw IoError(path.string() + ": corrupt JSON (" + e.what() + ")");
  }
}

}  // namespace

const char* git_hash() { return BILEVEL_GIT_HASH; }

std::vector<RunCell> expand_cells(const ExperimentConfig& cfg) {
  std::vector<RunCell> cells;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const MethodSpec& m = cfg.methods[i];
    std::vector<std::optional<double>> values{std::nullopt};
    if (cfg.sweep) values.assign(cfg.sweep->values.begin(), cfg.sweep->values.end());
    for (const auto& v : values) {
      RunCell c;
      c.method_index = i;
      c.sweep_value = v;
      c.solver = v ? apply_sweep(m.solver, cfg.sweep->parameter, *v) : m.solver;
      c.id = cell_id(m.label, cfg.sweep ? cfg.sweep->parameter : "", v);
      c.file = fs::path("runs") / (c.id + ".csv");
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

std::vector<FlowCell> expand_flow_cells(const ExperimentConfig& cfg) {
  std::vector<FlowCell> cells;
  for (std::size_t i = 0; i < cfg.flows.size(); ++i) {
    const FlowSpec& f = cfg.flows[i];
    std::vector<std::optional<double>> values{std::nullopt};
    if (cfg.flow_sweep) values.assign(cfg.flow_sweep->values.begin(), cfg.flow_sweep->values.end());
    for (const auto& v : values) {
      FlowCell c;
      c.flow_index = i;
      c.sweep_value = v;
      c.spec = f;
      if (v) {
        const std::string& p = cfg.flow_sweep->parameter;
        if (p == "delta") c.spec.flow.sched.delta = *v;
        if (p == "c") c.spec.flow.sched.c = *v;
        if (p == "alpha") c.spec.flow.alpha = *v;
      }
      c.id = cell_id(f.label, cfg.flow_sweep ? cfg.flow_sweep->parameter : "", v);
      c.file = fs::path("flows") / (c.id + ".csv");
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

BilevelProblem build_problem(const ExperimentConfig& cfg, kernels::Backend backend, Json* oracle_info) {
  BilevelProblem prob;
  Json info = Json::object();
  if (const auto* n = std::get_if<NemirovskyProblem>(&cfg.problem)) {
    prob = make_nemirovsky(n->spec, backend);
  } else if (const auto* m = std::get_if<MinNormProblem>(&cfg.problem)) {
    prob = m->A ? make_min_norm_problem(*m->A, *m->b) : make_min_norm_toy(m->m, m->d, m->seed);
  } else {
    const auto& l = std::get<LogisticProblem>(cfg.problem);
    const Dataset ds = l.synthetic_seed
                           ? synthetic_dataset(l.synthetic_n, l.synthetic_p, *l.synthetic_seed)
                           : load_dataset_csv(resolve_data_path(l.csv_path));
    prob = make_logistic_lifted(ds, l.lift, backend);
    ReferenceValues ref;
    std::string source;
    if (l.reference_values) {
      ref = *l.reference_values;
      source = "config";
    } else {
      fs::path cache = l.reference_cache.empty() ? fs::path("reference.json") : fs::path(l.reference_cache);
      if (cache.is_relative()) cache = cfg.output_dir / cache;
      const Json key = reference_key(prob, l.reference);
      bool hit = false;
      if (fs::exists(cache)) {
        try {
          const Json cached = read_json_file(cache);
          if (cached.value("key", Json()) == key) {
            ref.min_inner = cached.at("min_inner").get<double>();
            ref.min_outer = cached.at("min_outer").get<double>();
            ref.iterations = cached.at("key").at("iterations").get<long long>();
            hit = true;
          }
        } catch (const std::exception&) {
          hit = false;
        }
      }
      if (!hit) {
        ref = compute_reference(prob, l.reference);
        write_text_file(cache, Json{{"key", key}, {"min_inner", ref.min_inner}, {"min_outer", ref.min_outer}}.dump(2) + "\n");
      }
      source = hit ? "cache" : "computed";
      info["cache"] = cache.string();
      info["reference_iterations"] = l.reference.iterations;
    }
    attach_reference_oracle(prob, ref);
    info["source"] = source;
  }
  const Oracle& o = prob.require_oracle();
  info["min_inner"] = o.min_inner;
  info["min_outer_on_argmin"] = o.min_outer_on_argmin;
  info["exact"] = o.inner_exact && o.outer_exact;
  info["label"] = o.inner_exact && o.outer_exact ? "exact" : "reference, not exact";
  info["has_x_star"] = o.x_star.has_value();
  if (o.holder) info["holder"] = {{"rho", o.holder->rho}, {"tau", o.holder->tau}};
  if (oracle_info) *oracle_info = std::move(info);
  return prob;
}

Json run_batch(const ExperimentConfig& cfg, const BatchOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const fs::path out = cfg.output_dir;
  require_writable_dir(out, out / kManifest, options.force);
  if (cfg.methods.empty()) throw ValidationError("methods", "must list at least one method");

  const kernels::Backend backend = options.jobs > 1 ? kernels::Backend::Serial : kernels::Backend::Parallel;
  Json oracle_info;
  const BilevelProblem prob = build_problem(cfg, backend, &oracle_info);
  std::vector<RunCell> cells = expand_cells(cfg);
  for (auto& c : cells) {
    c.solver.backend = backend;
    try {
      validate(c.solver, prob);
    } catch (const ValidationError& e) {
      throw ValidationError("methods." + std::to_string(c.method_index) + "." + e.path(),
                            bare_message(e) + " (run " + c.id + ")");
    }
  }
  const Vector x0 = make_start(cfg.x0, prob, "x0");

  std::error_code ec;
  fs::remove_all(out / "runs", ec);
  fs::create_directories(out / "runs", ec);
  if (ec) throw IoError("cannot create '" + (out / "runs").string() + "': " + ec.message());

  RunOptions ropts;
  ropts.record_every = cfg.record_every;
  ropts.store_iterates = cfg.diagnostics.dissipation || cfg.diagnostics.best_iterate;
  ropts.compute_energy = cfg.diagnostics.lyapunov;

  std::vector<Json> entries(cells.size());
  std::mutex log_mu;
  parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
    const RunCell& c = cells[i];
    Json e = {{"id", c.id},
              {"file", c.file.generic_string()},
              {"method", method_name(c.solver.method)},
              {"method_index", c.method_index},
              {"label", cfg.methods[c.method_index].label},
              {"sweep_value", c.sweep_value ? Json(*c.sweep_value) : Json(nullptr)},
              {"step", resolved_step(c.solver, prob)},
              {"schedule", schedule_json(c.solver.schedule)},
              {"alpha", c.solver.alpha},
              {"gamma", c.solver.gamma},
              {"max_iter", c.solver.max_iter}};
    try {
      const RunTrace trace = run(prob, c.solver, x0, {}, ropts);
      write_trace_csv(trace, out / c.file);
      e["status"] = trace.failed ? "failed" : "ok";
      if (trace.failed) e["error"] = trace.error;
      e["rows"] = trace.records.size();
      e["wall_seconds"] = trace.wall_seconds;
      e["storage"] = storage_policy_name(trace.storage);
      e["diagnostics"] = run_diagnostics(prob, cfg, c, trace);
    } catch (const std::exception& ex) {
      e["status"] = "failed";
      e["error"] = ex.what();
    }
    log_line(options, log_mu, "  " + c.id + ": " + e["status"].get<std::string>());
    entries[i] = std::move(e);
  });

  Json manifest = Json::object();
  manifest["manifest_version"] = 1;
  manifest["kind"] = "run";
  manifest["git_hash"] = git_hash();
  manifest["config"] = cfg.resolved;
  manifest["problem"] = {{"id", prob.id},
                         {"dimension", prob.dimension},
                         {"L_f", prob.inner.smooth.lipschitz()},
                         {"L_h", prob.outer.smooth.lipschitz()},
                         {"oracle", oracle_info}};
  if (cfg.diagnostics.holder_check && prob.oracle && prob.oracle->holder && prob.oracle->x_star) {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> samples;
    for (std::size_t s = 0; s < cfg.diagnostics.holder_samples; ++s) {
      Vector x = *prob.oracle->x_star;
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += normal(rng);
      samples.push_back(std::move(x));
    }
    const HolderReport rep = check_holder_growth(prob, samples);
    manifest["problem"]["holder_check"] = {{"worst_ratio", number_or_null(rep.worst_ratio)},
                                           {"passed", rep.passed},
                                           {"bound_checked", rep.bound_checked},
                                           {"bound_holds", rep.bound_holds}};
  }
  manifest["backend"] = kernels::backend_name(backend);
  manifest["jobs"] = options.jobs;
  manifest["runs"] = entries;
  manifest["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_text_file(out / kManifest, manifest.dump(2) + "\n");
  return manifest;
}

Json flow_batch(const ExperimentConfig& cfg, const BatchOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const fs::path out = cfg.output_dir;
  require_writable_dir(out, out / kFlowManifest, options.force);
  if (cfg.flows.empty()) throw ValidationError("flows", "must list at least one flow");

  Json oracle_info;
  const BilevelProblem prob = build_problem(cfg, kernels::Backend::Serial, &oracle_info);
  std::vector<FlowCell> cells = expand_flow_cells(cfg);
  for (auto& c : cells) {
    FlowConfig& fc = c.spec.flow;
    fc.x0 = make_start(c.spec.x0, prob, "flows." + std::to_string(c.flow_index) + ".x0");
    fc.dt = c.spec.dt.value_or(c.spec.dt_fraction * fc.max_dt(prob));
    try {
      fc.validate(prob);
    } catch (const ValidationError& e) {
      throw ValidationError("flows." + std::to_string(c.flow_index) + "." + e.path(),
                            bare_message(e) + " (flow " + c.id + ")");
    }
  }

  std::error_code ec;
  fs::remove_all(out / "flows", ec);
  fs::create_directories(out / "flows", ec);
  if (ec) throw IoError("cannot create '" + (out / "flows").string() + "': " + ec.message());

  std::vector<Json> entries(cells.size());
  std::mutex log_mu;
  parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
    const FlowCell& c = cells[i];
    const FlowConfig& fc = c.spec.flow;
    Json e = {{"id", c.id},
              {"file", c.file.generic_string()},
              {"order", fc.order == Order::First ? "first" : "second"},
              {"flow_index", c.flow_index},
              {"sweep_value", c.sweep_value ? Json(*c.sweep_value) : Json(nullptr)},
              {"alpha", fc.alpha},
              {"schedule", schedule_json(fc.sched)},
              {"t0", fc.t0},
              {"t_end", fc.t_end},
              {"dt", fc.dt}};
    try {
      const FlowTrace trace = integrate_flow(prob, fc);
      write_flow_csv(trace, out / c.file);
      e["status"] = "ok";
      e["rows"] = trace.records.size();
      e["steps"] = trace.steps;
      e["wall_seconds"] = trace.wall_seconds;
      Json d = Json::object();
      const FlowRecord& last = trace.records.back();
      d["final"] = {{"t", last.t}, {"F_res", number_or_null(last.F_res)},
                    {"H_gap", number_or_null(last.H_gap)}, {"dist", number_or_null(last.dist)}};
      std::vector<double> ts, fr, hg;
      for (const auto& r : trace.records) {
        if (r.t < fc.t_end / 10.0) continue;
        ts.push_back(r.t);
        fr.push_back(r.F_res);
        hg.push_back(std::abs(r.H_gap));
      }
      d["fit"] = {{"window", {fc.t_end / 10.0, fc.t_end}}, {"F_res", fit_json(ts, fr)},
                  {"abs_H_gap", fit_json(ts, hg)}};
      if (prob.oracle && prob.oracle->x_star) {
        const double lambda = fc.lambda.value_or(default_lambda(fc.order, fc.alpha));
        const LyapunovSeries ser = continuous_lyapunov(prob, fc, trace, lambda);
        double t_valid = kInfinity;
        for (std::size_t j = ser.slack.size(); j-- > 0;) {
          if (ser.slack[j] < -ser.tolerance[j]) break;
          t_valid = ser.t[j];
        }
        d["dissipation"] = {{"lambda", lambda}, {"t_valid", number_or_null(t_valid)}};
      }
      e["diagnostics"] = d;
    } catch (const std::exception& ex) {
      e["status"] = "failed";
      e["error"] = ex.what();
    }
    log_line(options, log_mu, "  " + c.id + ": " + e["status"].get<std::string>());
    entries[i] = std::move(e);
  });

  Json manifest = Json::object();
  manifest["manifest_version"] = 1;
  manifest["kind"] = "flow";
  manifest["git_hash"] = git_hash();
  manifest["config"] = cfg.resolved;
  manifest["problem"] = {{"id", prob.id}, {"dimension", prob.dimension}, {"oracle", oracle_info}};
  manifest["flows"] = entries;
  manifest["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_text_file(out / kFlowManifest, manifest.dump(2) + "\n");
  return manifest;
}

void compare_batch(const ExperimentConfig& cfg, const BatchOptions& options) {
  const fs::path out = cfg.output_dir;
  Json manifest;
  if (!options.force && fs::exists(out / kManifest)) {
    manifest = read_json_file(out / kManifest);
  } else {
    manifest = run_batch(cfg, options);
  }

  std::vector<std::string> ids, missing;
  std::vector<RunTrace> traces;
  std::optional<double> guide = cfg.compare.guide_delta;
  for (const auto& r : manifest.at("runs")) {
    const fs::path file = out / r.at("file").get<std::string>();
    if (!fs::exists(file)) {
      missing.push_back(file.string());
      continue;
    }
    ids.push_back(r.at("id").get<std::string>());
    traces.push_back(read_trace_csv(file));
    const Json& sched = r.at("schedule");
    if (!guide && sched.contains("delta")) {
      const Method m = parse_method(r.at("method").get<std::string>());
      if (is_second_order(m)) guide = sched.at("delta").get<double>();
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing run traces:";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg);
  }
  if (!guide) {
    for (const auto& r : manifest.at("runs")) {
      if (r.at("schedule").contains("delta")) {
        guide = 2.0 * r.at("schedule").at("delta").get<double>();
        break;
      }
    }
  }

  std::string merged = "method,k,F_res,H_gap,dist,step_norm\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (const auto& r : traces[i].records) {
      merged += ids[i] + "," + std::to_string(r.k) + "," + format_double(r.F_res) + "," +
                format_double(r.H_gap) + "," + format_double(r.dist) + "," + format_double(r.step_norm) + "\n";
    }
  }
  write_text_file(out / "compare" / "compare.csv", merged);

  const std::pair<TraceField, const char*> panels[] = {{TraceField::F_res, "F_res"},
                                                       {TraceField::AbsH_gap, "H_gap"},
                                                       {TraceField::Dist, "dist"},
                                                       {TraceField::StepNorm, "step_norm"}};
  for (const auto& [field, name] : panels) {
    std::map<long long, std::vector<double>> rows;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      for (const auto& r : traces[i].records) {
        auto& row = rows[r.k];
        row.resize(traces.size(), std::numeric_limits<double>::quiet_NaN());
        row[i] = field_value(r, field);
      }
    }
    // Guides pass through the largest panel value at the first k >= 1.
    double scale = 1.0;
    for (const auto& [k, row] : rows) {
      if (k < 1) continue;
      double best = 0.0;
      for (double v : row) {
        if (std::isfinite(v) && v > best) best = v;
      }
      if (best > 0.0) scale = best * std::pow(static_cast<double>(k), guide.value_or(0.0));
      break;
    }
    std::string csv = "k";
    for (const auto& id : ids) csv += "," + id;
    csv += ",guide_k^-delta/2,guide_k^-delta\n";
    std::vector<PlotSeries> series(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) series[i].name = ids[i];
    PlotSeries g_half{"k^-delta/2", {}, {}, true}, g_full{"k^-delta", {}, {}, true};
    for (const auto& [k, row] : rows) {
      csv += std::to_string(k);
      for (std::size_t i = 0; i < row.size(); ++i) {
        csv += "," + format_double(row[i]);
        series[i].x.push_back(static_cast<double>(k));
        series[i].y.push_back(row[i]);
      }
      double half = std::numeric_limits<double>::quiet_NaN(), full = half;
      if (guide && k >= 1) {
        const double kk = static_cast<double>(k);
        half = scale * std::pow(kk, -*guide / 2.0);
        full = scale * std::pow(kk, -*guide);
        g_half.x.push_back(kk);
        g_half.y.push_back(half);
        g_full.x.push_back(kk);
        g_full.y.push_back(full);
      }
      csv += "," + format_double(half) + "," + format_double(full) + "\n";
    }
    write_text_file(out / "compare" / (std::string("panel_") + name + ".csv"), csv);
    if (cfg.compare.svg) {
      if (guide) {
        series.push_back(g_half);
        series.push_back(g_full);
      }
      write_text_file(out / "compare" / (std::string("panel_") + name + ".svg"),
                      render_loglog_svg(name, "k", series));
    }
  }
}

Json report(const fs::path& output_dir, std::ostream& out) {
  const fs::path manifest_path = output_dir / kManifest;
  if (!fs::exists(manifest_path)) throw IoError("no " + std::string(kManifest) + " in '" + output_dir.string() + "'");
  const Json manifest = read_json_file(manifest_path);
  if (!manifest.contains("runs") || !manifest.at("runs").is_array()) {
    throw IoError(manifest_path.string() + ": corrupt manifest (no runs array)");
  }
  std::optional<std::pair<long long, long long>> window;
  if (manifest.contains("config")) {
    const Json& c = manifest.at("config");
    if (c.contains("diagnostics") && c.at("diagnostics").contains("fit_window")) {
      const Json& w = c.at("diagnostics").at("fit_window");
      window = {w.at(0).get<long long>(), w.at(1).get<long long>()};
    }
  }

  Json rep = Json::object();
  rep["output_dir"] = output_dir.string();
  if (manifest.contains("problem")) rep["problem"] = manifest.at("problem");
  Json rows = Json::array();
  char line[256];
  std::snprintf(line, sizeof(line), "%-36s %-7s %10s %10s %6s %12s %s\n", "run", "method",
                "F_res", "|H_gap|", "k0", "final_dist", "status");
  out << line;
  for (const auto& r : manifest.at("runs")) {
    const std::string id = r.value("id", "?");
    const fs::path file = output_dir / r.value("file", "");
    const RunTrace trace = read_trace_csv(file);
    Json row = {{"id", id}, {"method", r.value("method", "?")}, {"status", r.value("status", "?")},
                {"file", r.value("file", "")}};
    double f_slope = kInfinity, h_slope = kInfinity, dist = kInfinity;
    long long k0 = -1;
    if (!trace.records.empty()) {
      const auto w = window.value_or(last_decade(trace.records.back().k));
      const Json fits = trace_fits(trace, w);
      row["fit"] = fits;
      if (fits.at("F_res").contains("slope")) f_slope = fits.at("F_res").at("slope").get<double>();
      if (fits.at("abs_H_gap").contains("slope")) h_slope = fits.at("abs_H_gap").at("slope").get<double>();
      dist = trace.records.back().dist;
      row["final_dist"] = number_or_null(dist);
      row["final_k"] = trace.records.back().k;
    }
    if (r.contains("diagnostics") && r.at("diagnostics").contains("dissipation") &&
        r.at("diagnostics").at("dissipation").contains("k0")) {
      k0 = r.at("diagnostics").at("dissipation").at("k0").get<long long>();
      row["dissipation_k0"] = k0;
    }
    std::snprintf(line, sizeof(line), "%-36s %-7s %10s %10s %6s %12s %s\n", id.c_str(),
                  row["method"].get<std::string>().c_str(), fmt(f_slope, "%.2f").c_str(),
                  fmt(h_slope, "%.2f").c_str(), k0 >= 0 ? std::to_string(k0).c_str() : "-",
                  fmt(dist, "%.3e").c_str(), row["status"].get<std::string>().c_str());
    out << line;
    rows.push_back(row);
  }
  rep["runs"] = rows;

  const fs::path flow_manifest = output_dir / kFlowManifest;
  if (fs::exists(flow_manifest)) {
    const Json fm = read_json_file(flow_manifest);
    Json flows = Json::array();
    for (const auto& f : fm.value("flows", Json::array())) {
      Json row = {{"id", f.value("id", "?")}, {"status", f.value("status", "?")}};
      if (f.contains("diagnostics")) row["diagnostics"] = f.at("diagnostics");
      flows.push_back(row);
    }
    rep["flows"] = flows;
  }
  write_text_file(output_dir / "report.json", rep.dump(2) + "\n");
  return rep;
}

}  // namespace bilevel
