#include "clsqp/bench.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace clsqp {

using nlohmann::json;
namespace fs = std::filesystem;

bool BenchConfig::operator==(const BenchConfig& o) const {
  return environment == o.environment && case_index == o.case_index && method == o.method &&
         max_iters == o.max_iters && tol_primal == o.tol_primal && tol_dual == o.tol_dual &&
         gamma_initial == o.gamma_initial && gamma_factor == o.gamma_factor && gamma_floor == o.gamma_floor &&
         hessian_mode == o.hessian_mode && sigma == o.sigma && eta == o.eta && alpha_min == o.alpha_min &&
         parallel == o.parallel && record_merit_checks == o.record_merit_checks &&
         record_timing == o.record_timing && x0.size() == o.x0.size() && x0 == o.x0 &&
         obstacles == o.obstacles && output_dir == o.output_dir && seed == o.seed;
}

BenchConfig default_config(const std::string& environment, int case_index) {
  const Environment env = make_environment(environment, case_index);
  const SolverOptions& so = env.options;
  BenchConfig c;
  c.environment = environment;
  c.case_index = case_index;
  c.max_iters = so.max_iters;
  c.tol_primal = so.tol_primal;
  c.tol_dual = so.tol_dual;
  c.gamma_initial = so.gamma.initial;
  c.gamma_factor = so.gamma.factor;
  c.gamma_floor = so.gamma.floor;
  c.hessian_mode = so.hessian_mode;
  c.sigma = so.line_search.sigma;
  c.eta = so.line_search.eta;
  c.alpha_min = so.line_search.alpha_min;
  const CaseSetup cs = default_case(environment, case_index);
  c.x0 = cs.x0;
  c.obstacles = cs.obstacles;
  c.output_dir = "out/" + environment + "_case" + std::to_string(case_index);
  return c;
}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void fail_at(const std::string& text, const std::string& key, const std::string& what) {
  const int line = line_of_key(text, key);
  throw Error("config error" + (line > 0 ? " at line " + std::to_string(line) : std::string()) + ": " + what);
}

std::string hessian_name(HessianMode m) { return m == HessianMode::full ? "full" : "gauss_newton"; }

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "environment", "case", "method", "max_iters", "tol_primal", "tol_dual", "gamma_initial", "gamma_factor",
      "gamma_floor", "hessian_mode", "sigma", "eta", "alpha_min", "parallel", "record_merit_checks",
      "record_timing", "x0", "obstacles", "output_dir", "seed"};
  return keys;
}

}  // namespace

BenchConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("config parse error at line " + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw Error("config error at line 1: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail_at(text, key, "unknown key '" + key + "'");
  }

  auto get = [&](const std::string& key, auto& out) {
    if (!j.contains(key)) return;
    try {
      out = j.at(key).get<std::decay_t<decltype(out)>>();
    } catch (const json::exception& e) {
      fail_at(text, key, "invalid value for '" + key + "': " + e.what());
    }
  };

  std::string env = "car";
  int case_index = 1;
  get("environment", env);
  get("case", case_index);
  BenchConfig c;
  try {
    const auto cases = available_cases(env);
    if (std::find(cases.begin(), cases.end(), case_index) == cases.end()) {
      fail_at(text, "case", "environment '" + env + "' has no case " + std::to_string(case_index));
    }
    c = default_config(env, case_index);
  } catch (const Error& e) {
    if (std::string(e.what()).rfind("config error", 0) == 0) throw;
    fail_at(text, "environment", e.what());
  }

  if (j.contains("method")) {
    std::string m;
    get("method", m);
    try {
      c.method = parse_method(m);
    } catch (const Error& e) {
      fail_at(text, "method", e.what());
    }
  }
  get("max_iters", c.max_iters);
  get("tol_primal", c.tol_primal);
  get("tol_dual", c.tol_dual);
  get("gamma_initial", c.gamma_initial);
  get("gamma_factor", c.gamma_factor);
  get("gamma_floor", c.gamma_floor);
  if (j.contains("hessian_mode")) {
    std::string h;
    get("hessian_mode", h);
    if (h == "full") {
      c.hessian_mode = HessianMode::full;
    } else if (h == "gauss_newton") {
      c.hessian_mode = HessianMode::gauss_newton;
    } else {
      fail_at(text, "hessian_mode", "unknown hessian_mode '" + h + "' (valid: full, gauss_newton)");
    }
  }
  get("sigma", c.sigma);
  get("eta", c.eta);
  get("alpha_min", c.alpha_min);
  get("parallel", c.parallel);
  get("record_merit_checks", c.record_merit_checks);
  get("record_timing", c.record_timing);
  if (j.contains("x0")) {
    std::vector<double> x0;
    get("x0", x0);
    if (static_cast<Eigen::Index>(x0.size()) != c.x0.size()) {
      fail_at(text, "x0", "x0 must have " + std::to_string(c.x0.size()) + " entries");
    }
    c.x0 = Eigen::Map<const Vec>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  }
  if (j.contains("obstacles")) {
    std::vector<std::array<double, 3>> obs;
    get("obstacles", obs);
    c.obstacles.clear();
    for (const auto& o : obs) {
      if (!(o[2] > 0.0)) fail_at(text, "obstacles", "obstacle radius must be positive");
      c.obstacles.push_back({o[0], o[1], o[2]});
    }
  }
  get("output_dir", c.output_dir);
  get("seed", c.seed);

  if (c.max_iters < 0) fail_at(text, "max_iters", "max_iters must be non-negative");
  if (!(c.tol_primal > 0.0)) fail_at(text, "tol_primal", "tol_primal must be positive");
  if (!(c.tol_dual > 0.0)) fail_at(text, "tol_dual", "tol_dual must be positive");
  if (!(c.gamma_initial > 0.0) || !(c.gamma_floor > 0.0) || !(c.gamma_factor > 0.0) || c.gamma_factor > 1.0) {
    fail_at(text, "gamma_initial", "gamma schedule needs positive values and factor in (0, 1]");
  }
  if (!(c.sigma > 0.0 && c.sigma < c.eta && c.eta < 1.0)) {
    fail_at(text, "sigma", "line search needs 0 < sigma < eta < 1");
  }
  if (!(c.alpha_min > 0.0 && c.alpha_min < 1.0)) fail_at(text, "alpha_min", "alpha_min must lie in (0, 1)");
  return c;
}

BenchConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const BenchConfig& c) {
  json j = json::object();
  j["environment"] = c.environment;
  j["case"] = c.case_index;
  j["method"] = to_string(c.method);
  j["max_iters"] = c.max_iters;
  j["tol_primal"] = c.tol_primal;
  j["tol_dual"] = c.tol_dual;
  j["gamma_initial"] = c.gamma_initial;
  j["gamma_factor"] = c.gamma_factor;
  j["gamma_floor"] = c.gamma_floor;
  j["hessian_mode"] = hessian_name(c.hessian_mode);
  j["sigma"] = c.sigma;
  j["eta"] = c.eta;
  j["alpha_min"] = c.alpha_min;
  j["parallel"] = c.parallel;
  j["record_merit_checks"] = c.record_merit_checks;
  j["record_timing"] = c.record_timing;
  j["x0"] = std::vector<double>(c.x0.data(), c.x0.data() + c.x0.size());
  json obs = json::array();
  for (const Obstacle& o : c.obstacles) obs.push_back({o.x, o.y, o.radius});
  j["obstacles"] = obs;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j.dump(2);
}

std::string config_hash(const BenchConfig& config) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_to_json(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SolverOptions solver_options(const BenchConfig& c) {
  SolverOptions o = make_environment(c).options;
  o.method = c.method;
  o.max_iters = c.max_iters;
  o.tol_primal = c.tol_primal;
  o.tol_dual = c.tol_dual;
  o.gamma = {c.gamma_initial, c.gamma_factor, c.gamma_floor};
  o.hessian_mode = c.hessian_mode;
  o.line_search.sigma = c.sigma;
  o.line_search.eta = c.eta;
  o.line_search.alpha_min = c.alpha_min;
  o.parallel = c.parallel;
  o.barrier.parallel = c.parallel;
  o.record_merit_checks = c.record_merit_checks;
  o.seed = c.seed;
  return o;
}

Environment make_environment(const BenchConfig& c) {
  return make_environment(c.environment, c.case_index, CaseSetup{c.x0, c.obstacles});
}

std::string RunSummary::line() const {
  std::ostringstream os;
  os << "env=" << environment << " case=" << case_index << " method=" << method
     << " converged=" << (converged ? "true" : "false") << " iter=" << iterations;
  if (stalled) os << " stall=" << stall_reason << "@" << stall_iteration;
  os << std::setprecision(6) << " obj=" << objective << " viol=" << violation << " time_per_iter_s=" << time_per_iter_s;
  return os.str();
}

std::string RunSummary::to_json() const {
  json j;
  j["environment"] = environment;
  j["case"] = case_index;
  j["method"] = method;
  j["converged"] = converged;
  j["stalled"] = stalled;
  j["stall_iteration"] = stall_iteration;
  j["stall_reason"] = stall_reason;
  j["iterations"] = iterations;
  j["objective"] = objective;
  j["violation"] = violation;
  j["time_per_iter_s"] = time_per_iter_s;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  return j.dump(2);
}

RunSummary RunSummary::from_json(const std::string& text) {
  const json j = json::parse(text);
  RunSummary s;
  s.environment = j.at("environment").get<std::string>();
  s.case_index = j.at("case").get<int>();
  s.method = j.at("method").get<std::string>();
  s.converged = j.at("converged").get<bool>();
  s.stalled = j.at("stalled").get<bool>();
  s.stall_iteration = j.at("stall_iteration").get<int>();
  s.stall_reason = j.at("stall_reason").get<std::string>();
  s.iterations = j.at("iterations").get<int>();
  s.objective = j.at("objective").get<double>();
  s.violation = j.at("violation").get<double>();
  s.time_per_iter_s = j.at("time_per_iter_s").get<double>();
  s.seed = j.at("seed").get<unsigned>();
  s.config_hash = j.at("config_hash").get<std::string>();
  return s;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write '" + p.string() + "'");
  f << std::setprecision(17);
  return f;
}

}  // namespace

ExperimentResult run_experiment(const BenchConfig& config) {
  const Environment env = make_environment(config);
  const SolverOptions opt = solver_options(config);
  ExperimentResult res;
  res.report = sqp_solve(env.spec, env.u_init, opt);
  const SolveReport& rep = res.report;

  RunSummary& s = res.summary;
  s.environment = config.environment;
  s.case_index = config.case_index;
  s.method = to_string(config.method);
  s.converged = rep.converged;
  s.stalled = rep.stalled;
  s.stall_iteration = rep.stall_iteration;
  s.stall_reason = rep.stall_reason;
  s.iterations = rep.num_iterations();
  s.objective = rep.final_objective();
  s.violation = rep.final_violation();
  s.time_per_iter_s = config.record_timing ? rep.total_time_s / std::max(1, s.iterations) : 0.0;
  s.seed = config.seed;
  s.config_hash = config_hash(config);

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "iterations.csv");
    f << "iter,alpha,objective,max_violation,kkt_stationarity,kkt_complementarity,time_qp_s,time_gains_s,"
         "time_linesearch_s\n";
    for (const IterationStats& st : rep.iterations) {
      const double t = config.record_timing ? 1.0 : 0.0;
      f << st.iter << ',' << st.alpha << ',' << st.objective << ',' << st.max_violation << ','
        << st.kkt_stationarity << ',' << st.kkt_complementarity << ',' << t * st.time_qp_s << ','
        << t * st.time_gains_s << ',' << t * st.time_linesearch_s << '\n';
    }
  }
  {
    auto f = open_out(dir / "trajectory.csv");
    const int n = env.spec.n(), m = env.spec.m(), N = env.spec.horizon;
    f << "k";
    for (int i = 0; i < n; ++i) f << ",x" << i;
    for (int i = 0; i < m; ++i) f << ",u" << i;
    f << '\n';
    const Iterate& it = rep.final_iterate;
    for (int k = 0; k <= N; ++k) {
      f << k;
      for (int i = 0; i < n; ++i) f << ',' << it.x[k](i);
      for (int i = 0; i < m; ++i) {
        f << ',';
        if (k < N) f << it.u[k](i);
      }
      f << '\n';
    }
  }
  {
    auto f = open_out(dir / "reconstruction_error.csv");
    f << "iter,gains";
    for (int k = 0; k < env.spec.horizon; ++k) f << ",k" << k;
    f << '\n';
    for (std::size_t i = 0; i < rep.reconstruction_error.size(); ++i) {
      f << i << ',' << rep.iterations[i].gains;
      const Vec& e = rep.reconstruction_error[i];
      for (int k = 0; k < env.spec.horizon; ++k) {
        f << ',';
        if (k < e.size()) f << e(k);
      }
      f << '\n';
    }
  }
  {
    auto f = open_out(dir / "summary.json");
    f << s.to_json() << '\n';
  }
  {
    auto f = open_out(dir / "config.json");
    f << config_to_json(config) << '\n';
  }
  return res;
}

std::string format_report(const std::vector<ReportEntry>& entries) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Method", "Case", "Converged", "Iter", "Obj", "Viol", "Time/it [s]", "Seed", "Config"});
  auto num = [](double v, int prec) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
  };
  for (const ReportEntry& e : entries) {
    if (!e.summary) {
      rows.push_back({e.label, "-", "absent", "-", "-", "-", "-", "-", "-"});
      continue;
    }
    const RunSummary& s = *e.summary;
    std::string iter = std::to_string(s.iterations);
    if (s.stalled) iter = "stall (" + std::to_string(s.stall_iteration) + ")";
    rows.push_back({s.method, std::to_string(s.case_index), s.converged ? "yes" : "no", iter, num(s.objective, 6),
                    num(s.violation, 3), num(s.time_per_iter_s, 3), std::to_string(s.seed), s.config_hash});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream os;
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    for (std::size_t i = 0; i < rows[ri].size(); ++i) {
      os << std::left << std::setw(static_cast<int>(width[i])) << rows[ri][i];
      os << (i + 1 < rows[ri].size() ? "  " : "\n");
    }
    if (ri == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

std::vector<ReportEntry> collect_runs(const std::vector<fs::path>& run_dirs) {
  std::vector<ReportEntry> out;
  for (const fs::path& d : run_dirs) {
    ReportEntry e;
    e.label = d.filename().string();
    std::ifstream in(d / "summary.json");
    if (in) {
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        e.summary = RunSummary::from_json(ss.str());
      } catch (const json::exception&) {
        e.summary.reset();
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace clsqp
