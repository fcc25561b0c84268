#include "bilevel/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>
#include <set>

#include "bilevel/trace_io.hpp"

namespace bilevel {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object");
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ValidationError(join(path, item.key()), "unknown key");
  }
}

double get_number(const Json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number()) throw ValidationError(join(path, key), "expected a number");
  return v.get<double>();
}

std::optional<double> get_optional_number(const Json& j, const std::string& key,
                                          const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_number(j, key, path, 0.0);
}

long long get_integer(const Json& j, const std::string& key, const std::string& path,
                      long long fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const Json& v = j.at(key);
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  throw ValidationError(join(path, key), "expected an integer");
}

bool get_bool(const Json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_boolean()) throw ValidationError(join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& path,
                       const std::string& fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_string()) throw ValidationError(join(path, key), "expected a string");
  return j.at(key).get<std::string>();
}

std::vector<double> get_number_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(path + "." + std::to_string(i), "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

Schedule parse_schedule(const Json& j, const std::string& path, bool allow_beta) {
  if (allow_beta) {
    check_keys(j, path, {"c", "delta", "beta", "zero"});
  } else {
    check_keys(j, path, {"c", "delta", "zero"});
  }
  if (get_bool(j, "zero", path, false)) return Schedule::zero();
  Schedule s;
  s.c = get_number(j, "c", path, 1.0);
  s.delta = get_number(j, "delta", path, 1.0);
  s.beta = get_number(j, "beta", path, 1.0);
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(join(path, e.path().substr(e.path().find('.') + 1)), "must be > 0");
  }
  return s;
}

StartSpec parse_start(const Json& j, const std::string& path) {
  StartSpec s;
  if (j.is_null()) return s;
  if (j.is_string()) {
    s.kind = j.get<std::string>();
    if (s.kind != "zero") throw ValidationError(path, "string form only supports \"zero\"");
    return s;
  }
  if (j.is_array()) {
    s.kind = "vector";
    s.explicit_values = get_number_list(j, path);
    return s;
  }
  check_keys(j, path, {"type", "value", "seed", "scale", "around_solution", "values"});
  s.kind = get_string(j, "type", path, "zero");
  s.value = get_number(j, "value", path, 0.0);
  s.seed = static_cast<std::uint64_t>(get_integer(j, "seed", path, 0));
  s.scale = get_number(j, "scale", path, 1.0);
  s.around_solution = get_bool(j, "around_solution", path, false);
  if (j.contains("values")) s.explicit_values = get_number_list(j.at("values"), join(path, "values"));
  if (s.kind != "zero" && s.kind != "constant" && s.kind != "gaussian" && s.kind != "vector") {
    throw ValidationError(join(path, "type"), "expected zero, constant, gaussian or vector");
  }
  return s;
}

ProblemSpec parse_problem(const Json& j, const std::string& path) {
  require_object(j, path);
  const std::string type = get_string(j, "type", path, "");
  if (type == "nemirovsky") {
    check_keys(j, path, {"type", "d", "J", "xhat"});
    NemirovskyProblem p;
    p.spec.d = get_integer(j, "d", path, 200);
    p.spec.J = get_integer(j, "J", path, 100);
    p.spec.xhat_value = get_number(j, "xhat", path, 50.0);
    try {
      p.spec.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(join(path, e.path()), e.what());
    }
    return p;
  }
  if (type == "logistic") {
    check_keys(j, path, {"type", "csv", "synthetic", "degree", "n_samples", "raw_features",
                         "standardize", "dimension_cap", "reference"});
    LogisticProblem p;
    if (j.contains("synthetic")) {
      const std::string sp = join(path, "synthetic");
      check_keys(j.at("synthetic"), sp, {"seed", "n", "p"});
      p.synthetic_seed = static_cast<std::uint64_t>(get_integer(j.at("synthetic"), "seed", sp, 1));
      p.synthetic_n = get_integer(j.at("synthetic"), "n", sp, 455);
      p.synthetic_p = get_integer(j.at("synthetic"), "p", sp, 30);
      if (p.synthetic_n < 1 || p.synthetic_p < 1) throw ValidationError(sp, "n and p must be >= 1");
    } else {
      p.csv_path = get_string(j, "csv", path, "breast_cancer.csv");
    }
    p.lift.lift_degree = static_cast<int>(get_integer(j, "degree", path, 3));
    if (p.lift.lift_degree < 1) throw ValidationError(join(path, "degree"), "must be >= 1");
    p.lift.n_samples = get_integer(j, "n_samples", path, p.synthetic_seed ? 0 : kBreastCancerTrainRows);
    if (p.lift.n_samples < 0) throw ValidationError(join(path, "n_samples"), "must be >= 0");
    p.lift.raw_features = get_integer(j, "raw_features", path, 0);
    p.lift.standardize = get_bool(j, "standardize", path, true);
    p.lift.dimension_cap = get_integer(j, "dimension_cap", path, 6000);
    if (j.contains("reference")) {
      const std::string rp = join(path, "reference");
      const Json& r = j.at("reference");
      check_keys(r, rp, {"iterations", "c", "delta", "beta", "alpha", "gamma", "step_fraction",
                         "min_inner", "min_outer", "cache"});
      p.reference.iterations = get_integer(r, "iterations", rp, p.reference.iterations);
      p.reference.schedule.c = get_number(r, "c", rp, 100.0);
      p.reference.schedule.delta = get_number(r, "delta", rp, 1.9);
      p.reference.schedule.beta = get_number(r, "beta", rp, 1.0);
      p.reference.alpha = get_number(r, "alpha", rp, 4.0);
      p.reference.gamma = get_number(r, "gamma", rp, 1.0);
      p.reference.step_fraction = get_number(r, "step_fraction", rp, 0.95);
      if (p.reference.iterations < 1) throw ValidationError(join(rp, "iterations"), "must be >= 1");
      const auto mi = get_optional_number(r, "min_inner", rp);
      const auto mo = get_optional_number(r, "min_outer", rp);
      if (mi.has_value() != mo.has_value()) {
        throw ValidationError(rp, "min_inner and min_outer must be given together");
      }
      if (mi) p.reference_values = ReferenceValues{*mi, *mo, 0};
      p.reference_cache = get_string(r, "cache", rp, "");
    } else {
      p.reference.schedule.c = 100.0;
      p.reference.schedule.delta = 1.9;
    }
    return p;
  }
  if (type == "min_norm") {
    check_keys(j, path, {"type", "m", "d", "seed", "A", "b"});
    MinNormProblem p;
    p.m = get_integer(j, "m", path, 5);
    p.d = get_integer(j, "d", path, 20);
    p.seed = static_cast<std::uint64_t>(get_integer(j, "seed", path, 1));
    if (j.contains("A") != j.contains("b")) throw ValidationError(path, "A and b must be given together");
    if (j.contains("A")) {
      const Json& a = j.at("A");
      const std::string ap = join(path, "A");
      if (!a.is_array() || a.empty()) throw ValidationError(ap, "expected a nonempty matrix");
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < a.size(); ++i) rows.push_back(get_number_list(a[i], ap + "." + std::to_string(i)));
      const std::size_t cols = rows.front().size();
      Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols || cols == 0) throw ValidationError(ap, "ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
      }
      const auto b = get_number_list(j.at("b"), join(path, "b"));
      if (b.size() != rows.size()) throw ValidationError(join(path, "b"), "length must equal rows of A");
      p.A = A;
      p.b = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    } else if (!(p.m >= 1 && p.m < p.d)) {
      throw ValidationError(join(path, "m"), "need 1 <= m < d");
    }
    return p;
  }
  throw ValidationError(join(path, "type"), "expected nemirovsky, logistic or min_norm");
}

MethodSpec parse_method(const Json& j, const std::string& path) {
  check_keys(j, path, {"method", "label", "step", "step_fraction", "alpha", "gamma", "max_iter",
                       "schedule", "stabim"});
  MethodSpec m;
  const std::string name = get_string(j, "method", path, "");
  try {
    m.solver.method = bilevel::parse_method(name);
  } catch (const ValidationError&) {
    throw ValidationError(join(path, "method"), "unknown method '" + name + "'");
  }
  m.label = get_string(j, "label", path, method_name(m.solver.method));
  m.solver.step = get_optional_number(j, "step", path);
  m.solver.step_fraction = get_number(j, "step_fraction", path, 0.95);
  m.solver.alpha = get_number(j, "alpha", path, 4.0);
  m.solver.gamma = get_number(j, "gamma", path, 0.0);
  m.solver.max_iter = get_integer(j, "max_iter", path, 1000);
  if (m.solver.max_iter < 0) throw ValidationError(join(path, "max_iter"), "must be >= 0");
  if (j.contains("schedule")) m.solver.schedule = parse_schedule(j.at("schedule"), join(path, "schedule"), true);
  if (j.contains("stabim")) {
    const std::string sp = join(path, "stabim");
    check_keys(j.at("stabim"), sp, {"theta_tilde", "eta0", "eta_shrink"});
    m.solver.stabim_theta_tilde = get_number(j.at("stabim"), "theta_tilde", sp, 0.95);
    m.solver.stabim_eta0 = get_number(j.at("stabim"), "eta0", sp, 1.0);
    m.solver.stabim_eta_shrink = get_number(j.at("stabim"), "eta_shrink", sp, 0.75);
  }
  if (m.label.empty() || m.label.find_first_of("/\\ ") != std::string::npos) {
    throw ValidationError(join(path, "label"), "must be nonempty without spaces or slashes");
  }
  return m;
}

SweepSpec parse_sweep(const Json& j, const std::string& path, std::optional<std::uint64_t> seed,
                      Json& resolved) {
  check_keys(j, path, {"parameter", "values", "range", "count"});
  SweepSpec s;
  s.parameter = get_string(j, "parameter", path, "delta");
  if (j.contains("values")) {
    if (j.contains("range")) throw ValidationError(path, "give either values or range, not both");
    s.values = get_number_list(j.at("values"), join(path, "values"));
  } else {
    if (!j.contains("range")) throw ValidationError(path, "needs values or range");
    const auto range = get_number_list(j.at("range"), join(path, "range"));
    if (range.size() != 2 || !(range[0] < range[1])) {
      throw ValidationError(join(path, "range"), "expected [lo, hi] with lo < hi");
    }
    const long long count = get_integer(j, "count", path, 20);
    if (count < 1) throw ValidationError(join(path, "count"), "must be >= 1");
    if (seed) {
      std::mt19937_64 rng(*seed);
      std::uniform_real_distribution<double> unif(range[0], range[1]);
      for (long long i = 0; i < count; ++i) {
        double v = unif(rng);
        while (v == range[0]) v = unif(rng);
        s.values.push_back(v);
      }
      std::sort(s.values.begin(), s.values.end());
    } else {
      for (long long i = 1; i <= count; ++i) {
        s.values.push_back(range[0] + (range[1] - range[0]) * static_cast<double>(i) /
                                          static_cast<double>(count + 1));
      }
    }
    resolved.erase("range");
    resolved.erase("count");
    resolved["values"] = s.values;
  }
  if (s.values.empty()) throw ValidationError(join(path, "values"), "must be nonempty");
  return s;
}

const char* kSweepParameters[] = {"delta", "c", "beta", "alpha", "gamma", "step_fraction"};

void check_sweep_parameter(const std::string& p, const std::string& path) {
  for (const char* k : kSweepParameters) {
    if (p == k) return;
  }
  throw ValidationError(join(path, "parameter"), "unsupported sweep parameter '" + p + "'");
}

FlowSpec parse_flow(const Json& j, const std::string& path, std::size_t index) {
  check_keys(j, path, {"label", "order", "alpha", "schedule", "t0", "t_end", "dt", "dt_fraction",
                       "samples_per_decade", "lambda", "x0", "v0"});
  FlowSpec f;
  f.label = get_string(j, "label", path, "flow" + std::to_string(index));
  const std::string order = get_string(j, "order", path, "first");
  if (order == "first") {
    f.flow.order = Order::First;
  } else if (order == "second") {
    f.flow.order = Order::Second;
  } else {
    throw ValidationError(join(path, "order"), "expected first or second");
  }
  f.flow.alpha = get_number(j, "alpha", path, 4.0);
  if (f.flow.order == Order::Second && !(f.flow.alpha > 3.0)) {
    throw ValidationError(join(path, "alpha"), "second-order flow requires alpha > 3");
  }
  if (j.contains("schedule")) f.flow.sched = parse_schedule(j.at("schedule"), join(path, "schedule"), false);
  f.flow.t0 = get_number(j, "t0", path, 1.0);
  f.flow.t_end = get_number(j, "t_end", path, 100.0);
  if (!(f.flow.t0 > 0.0)) throw ValidationError(join(path, "t0"), "must be > 0");
  if (!(f.flow.t_end > f.flow.t0)) throw ValidationError(join(path, "t_end"), "must exceed t0");
  f.dt = get_optional_number(j, "dt", path);
  f.dt_fraction = get_number(j, "dt_fraction", path, 1.0);
  if (!(f.dt_fraction > 0.0 && f.dt_fraction <= 1.0)) {
    throw ValidationError(join(path, "dt_fraction"), "must lie in (0, 1]");
  }
  f.flow.samples_per_decade = static_cast<int>(get_integer(j, "samples_per_decade", path, 256));
  f.flow.lambda = get_optional_number(j, "lambda", path);
  if (j.contains("x0")) f.x0 = parse_start(j.at("x0"), join(path, "x0"));
  if (j.contains("v0")) {
    const auto v = get_number_list(j.at("v0"), join(path, "v0"));
    f.flow.v0 = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return f;
}

void set_path(Json& tree, const std::string& path, const Json& value) {
  Json* node = &tree;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError(path, "empty path component in --set");
    const bool numeric = std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; });
    Json* next = nullptr;
    if (numeric && node->is_array()) {
      const std::size_t idx = std::stoul(part);
      if (idx >= node->size()) throw ValidationError(path, "array index out of range");
      next = &(*node)[idx];
    } else {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object()) throw ValidationError(path, "cannot descend into a non-object");
      next = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *next = value;
      return;
    }
    node = next;
    start = dot + 1;
  }
}

}  // namespace

Json load_config_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  Json tree;
  try {
    tree = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  if (tree.is_object() && tree.contains("manifest_version") && tree.contains("config")) {
    return tree.at("config");
  }
  return tree;
}

Json apply_overrides(Json tree, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError(s, "--set expects path=value");
    const std::string path = s.substr(0, eq);
    const std::string raw = s.substr(eq + 1);
    Json value;
    try {
      value = Json::parse(raw);
    } catch (const Json::parse_error&) {
      value = raw;
    }
    set_path(tree, path, value);
  }
  return tree;
}

void validate_sweep_value(const MethodSpec& m, const std::string& parameter, double value,
                          const std::string& path) {
  if (parameter != "delta") {
    if (!(value > 0.0) && parameter != "gamma") throw ValidationError(path, parameter + " must be > 0");
    return;
  }
  const std::string who = "method '" + m.label + "'";
  if (is_second_order(m.solver.method)) {
    if (!(value > 0.0 && value <= 2.0)) {
      throw ValidationError(path, "delta=" + format_double(value) + " outside (0, 2] required by " + who);
    }
  } else if (m.solver.method == Method::BiSG2) {
    if (!(value / 2.0 > 0.5 && value / 2.0 <= 1.0)) {
      throw ValidationError(path, "delta/2=" + format_double(value / 2.0) +
                                      " outside (1/2, 1] required by " + who);
    }
  } else if (!(value / 2.0 > 0.0 && value / 2.0 <= 1.0)) {
    throw ValidationError(path, "delta/2=" + format_double(value / 2.0) + " outside (0, 1] required by " + who);
  }
}

SolverConfig apply_sweep(const SolverConfig& cfg, const std::string& parameter, double value) {
  SolverConfig out = cfg;
  if (parameter == "delta") {
    out.schedule.delta = is_second_order(cfg.method) ? value : value / 2.0;
  } else if (parameter == "c") {
    out.schedule.c = value;
  } else if (parameter == "beta") {
    out.schedule.beta = value;
  } else if (parameter == "alpha") {
    out.alpha = value;
  } else if (parameter == "gamma") {
    out.gamma = value;
  } else if (parameter == "step_fraction") {
    out.step_fraction = value;
    out.step.reset();
  } else {
    throw ValidationError("sweep.parameter", "unsupported sweep parameter '" + parameter + "'");
  }
  return out;
}

ExperimentConfig parse_config(const Json& tree, std::optional<std::uint64_t> sample_seed) {
  check_keys(tree, "", {"name", "problem", "x0", "methods", "sweep", "diagnostics", "output_dir",
                        "record_every", "flows", "flow_sweep", "compare"});
  ExperimentConfig cfg;
  cfg.resolved = tree;
  cfg.name = get_string(tree, "name", "", "experiment");
  if (!tree.contains("problem")) throw ValidationError("problem", "is required");
  cfg.problem = parse_problem(tree.at("problem"), "problem");
  if (tree.contains("x0")) cfg.x0 = parse_start(tree.at("x0"), "x0");
  cfg.output_dir = get_string(tree, "output_dir", "", "out");
  cfg.record_every = get_integer(tree, "record_every", "", 1);
  if (cfg.record_every < 1) throw ValidationError("record_every", "must be >= 1");

  if (tree.contains("methods")) {
    const Json& ms = tree.at("methods");
    if (!ms.is_array()) throw ValidationError("methods", "expected an array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string path = "methods." + std::to_string(i);
      MethodSpec m = parse_method(ms[i], path);
      if (!labels.insert(m.label).second) throw ValidationError(join(path, "label"), "duplicate label '" + m.label + "'");
      cfg.methods.push_back(std::move(m));
    }
  }
  if (tree.contains("sweep") && !tree.at("sweep").is_null()) {
    cfg.sweep = parse_sweep(tree.at("sweep"), "sweep", sample_seed, cfg.resolved["sweep"]);
    check_sweep_parameter(cfg.sweep->parameter, "sweep");
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
      for (std::size_t v = 0; v < cfg.sweep->values.size(); ++v) {
        validate_sweep_value(cfg.methods[i], cfg.sweep->parameter, cfg.sweep->values[v],
                             "sweep.values." + std::to_string(v));
      }
    }
  }
  if (tree.contains("diagnostics")) {
    const Json& d = tree.at("diagnostics");
    check_keys(d, "diagnostics", {"lyapunov", "dissipation", "best_iterate", "holder_check",
                                  "holder_samples", "fit_window"});
    cfg.diagnostics.lyapunov = get_bool(d, "lyapunov", "diagnostics", true);
    cfg.diagnostics.dissipation = get_bool(d, "dissipation", "diagnostics", false);
    cfg.diagnostics.best_iterate = get_bool(d, "best_iterate", "diagnostics", false);
    cfg.diagnostics.holder_check = get_bool(d, "holder_check", "diagnostics", false);
    cfg.diagnostics.holder_samples =
        static_cast<std::size_t>(get_integer(d, "holder_samples", "diagnostics", 1000));
    if (d.contains("fit_window")) {
      const auto w = get_number_list(d.at("fit_window"), "diagnostics.fit_window");
      if (w.size() != 2 || !(w[0] >= 1.0 && w[0] < w[1])) {
        throw ValidationError("diagnostics.fit_window", "expected [lo, hi] with 1 <= lo < hi");
      }
      cfg.diagnostics.fit_window = {static_cast<long long>(w[0]), static_cast<long long>(w[1])};
    }
  }
  if (tree.contains("flows")) {
    const Json& fs = tree.at("flows");
    if (!fs.is_array()) throw ValidationError("flows", "expected an array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      FlowSpec f = parse_flow(fs[i], "flows." + std::to_string(i), i);
      if (!labels.insert(f.label).second) {
        throw ValidationError("flows." + std::to_string(i) + ".label", "duplicate label");
      }
      cfg.flows.push_back(std::move(f));
    }
  }
  if (tree.contains("flow_sweep") && !tree.at("flow_sweep").is_null()) {
    cfg.flow_sweep = parse_sweep(tree.at("flow_sweep"), "flow_sweep", sample_seed, cfg.resolved["flow_sweep"]);
    const std::string& p = cfg.flow_sweep->parameter;
    if (p != "delta" && p != "c" && p != "alpha") {
      throw ValidationError("flow_sweep.parameter", "expected delta, c or alpha");
    }
    for (std::size_t v = 0; v < cfg.flow_sweep->values.size(); ++v) {
      const double value = cfg.flow_sweep->values[v];
      const std::string path = "flow_sweep.values." + std::to_string(v);
      if (!(value > 0.0)) throw ValidationError(path, p + " must be > 0");
      if (p == "alpha" && !(value > 3.0)) throw ValidationError(path, "alpha must be > 3");
    }
  }
  if (tree.contains("compare")) {
    const Json& c = tree.at("compare");
    check_keys(c, "compare", {"svg", "guide_delta"});
    cfg.compare.svg = get_bool(c, "svg", "compare", false);
    cfg.compare.guide_delta = get_optional_number(c, "guide_delta", "compare");
  }
  return cfg;
}

Vector make_start(const StartSpec& s, const BilevelProblem& prob, const std::string& path) {
  const Eigen::Index n = prob.dimension;
  Vector x = Vector::Zero(n);
  if (s.kind == "constant") {
    x.setConstant(s.value);
  } else if (s.kind == "gaussian") {
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = s.scale * normal(rng);
  } else if (s.kind == "vector") {
    if (static_cast<Eigen::Index>(s.explicit_values.size()) != n) {
      throw ValidationError(path, "expected " + std::to_string(n) + " entries");
    }
    x = Eigen::Map<const Vector>(s.explicit_values.data(), n);
  }
  if (s.around_solution) x += prob.require_x_star();
  return x;
}

}  // namespace bilevel
