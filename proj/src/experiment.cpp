#include "pnewton/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "pnewton/baselines.hpp"
#include "pnewton/error.hpp"

namespace pnewton::experiment {
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::ParseError, "bad value '" + value + "' for key '" + key + "'");
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(d)) bad_value(key, v);
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') bad_value(key, v);
  return i;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  bad_value(key, v);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string stop_name(StopRule r) {
  switch (r) {
    case StopRule::Either: return "either";
    case StopRule::Merit: return "merit";
    case StopRule::Dp: return "dp";
  }
  return "either";
}

std::string oracle_name(OracleMode m) {
  switch (m) {
    case OracleMode::Auto: return "auto";
    case OracleMode::On: return "on";
    case OracleMode::Off: return "off";
  }
  return "auto";
}

std::string kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Exponential: return "exponential";
    case KernelKind::Matern: return "matern";
  }
  return "gaussian";
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem.n", [](auto& c, auto& k, auto& v) { c.problem.n = to_int(k, v); }},
      {"problem.side", [](auto& c, auto& k, auto& v) { c.problem.side = to_int(k, v); }},
      {"problem.psf_sigma",
       [](auto& c, auto& k, auto& v) { c.problem.psf_sigma = to_double(k, v); }},
      {"problem.psf_radius",
       [](auto& c, auto& k, auto& v) { c.problem.psf_radius = to_int(k, v); }},
      {"noise.level", [](auto& c, auto& k, auto& v) { c.problem.noise.level = to_double(k, v); }},
      {"noise.kind", [](auto& c, auto&, auto& v) { c.problem.noise.kind = parse_noise_kind(v); }},
      {"noise.seed",
       [](auto& c, auto& k, auto& v) {
         const long long s = to_int(k, v);
         if (s < 0) bad_value(k, v);
         c.problem.noise.seed = static_cast<std::uint64_t>(s);
       }},
      {"kernel", [](auto& c, auto&, auto& v) { c.problem.kernel = kernels::parse_kernel_spec(v); }},
      {"kernel.kind",
       [](auto& c, auto& k, auto& v) {
         if (v == "gaussian") c.problem.kernel.kind = KernelKind::Gaussian;
         else if (v == "exponential") c.problem.kernel.kind = KernelKind::Exponential;
         else if (v == "matern") c.problem.kernel.kind = KernelKind::Matern;
         else bad_value(k, v);
       }},
      {"kernel.l", [](auto& c, auto& k, auto& v) { c.problem.kernel.length_scale = to_double(k, v); }},
      {"kernel.nu", [](auto& c, auto& k, auto& v) { c.problem.kernel.nu = to_double(k, v); }},
      {"kernel.jitter", [](auto& c, auto& k, auto& v) { c.problem.jitter = to_double(k, v); }},
      {"tau",
       [](auto& c, auto& k, auto& v) {
         c.opts.tau = to_double(k, v);
         c.problem.tau = c.opts.tau;
       }},
      {"lambda0", [](auto& c, auto& k, auto& v) { c.opts.lambda0 = to_double(k, v); }},
      {"c", [](auto& c, auto& k, auto& v) { c.opts.c = to_double(k, v); }},
      {"eta", [](auto& c, auto& k, auto& v) { c.opts.eta = to_double(k, v); }},
      {"tol", [](auto& c, auto& k, auto& v) { c.opts.tol = to_double(k, v); }},
      {"dp_tol", [](auto& c, auto& k, auto& v) { c.opts.dp_tol = to_double(k, v); }},
      {"max_iters",
       [](auto& c, auto& k, auto& v) { c.opts.max_iters = static_cast<int>(to_int(k, v)); }},
      {"min_step", [](auto& c, auto& k, auto& v) { c.opts.min_step = to_double(k, v); }},
      {"k0", [](auto& c, auto& k, auto& v) { c.md_k0 = static_cast<int>(to_int(k, v)); }},
      {"reorthogonalize",
       [](auto& c, auto& k, auto& v) { c.opts.reorthogonalize = to_bool(k, v); }},
      {"check_assumption",
       [](auto& c, auto& k, auto& v) { c.opts.check_assumption = to_bool(k, v); }},
      {"stop",
       [](auto& c, auto& k, auto& v) {
         if (v == "either") c.opts.stop = StopRule::Either;
         else if (v == "merit") c.opts.stop = StopRule::Merit;
         else if (v == "dp") c.opts.stop = StopRule::Dp;
         else bad_value(k, v);
       }},
      {"solvers",
       [](auto& c, auto& k, auto& v) {
         c.solvers = split_list(v);
         if (c.solvers.empty()) bad_value(k, v);
         for (const auto& s : c.solvers) {
           if (s != "pnt" && s != "pnt-md" && s != "newton") bad_value(k, s);
         }
       }},
      {"oracles",
       [](auto& c, auto& k, auto& v) {
         if (v == "auto") c.oracles = OracleMode::Auto;
         else if (v == "on") c.oracles = OracleMode::On;
         else if (v == "off") c.oracles = OracleMode::Off;
         else bad_value(k, v);
       }},
      {"output.dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
  };
  return table;
}

double tau_m_of(const ExperimentConfig& cfg, Index m) {
  return cfg.opts.tau * static_cast<double>(m);
}

void write_vector(const fs::path& path, const Vector& x) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (Index i = 0; i < x.size(); ++i) out << fmt(x[i]) << '\n';
}

struct ArmOutcome {
  std::string solver;
  PntResult result;
  double seconds = 0.0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool oracles_enabled(const ExperimentConfig& cfg, const ProblemInstance& p) {
  if (cfg.oracles == OracleMode::Off) return false;
  if (cfg.oracles == OracleMode::On) return true;
  return p.cols() <= kOracleAutoLimit;
}

bool dense_fits(const ProblemInstance& p) {
  const double m = static_cast<double>(p.rows());
  const double n = static_cast<double>(p.cols());
  return m * n <= linop::kMaterializeGuard && n * n <= linop::kMaterializeGuard &&
         m * m <= linop::kMaterializeGuard;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::string line;
  int line_no = 0;
  std::string problem_name = "heat";
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
    }
    if (key != "problem" && !setters().count(key)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (seen[key]++) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    if (key == "problem") {
      problem_name = value;
    } else {
      entries.emplace_back(key, value);
    }
  }

  if (seen.empty()) throw Error(ErrorCode::ParseError, "empty config");

  ExperimentConfig cfg;
  try {
    cfg.problem = problems::default_spec(problem_name);
  } catch (const Error&) {
    throw Error(ErrorCode::ParseError, "unknown problem '" + problem_name + "'");
  }
  cfg.problem.tau = cfg.opts.tau;
  // Kernel shorthand first so that kernel.* keys refine it.
  for (const auto& [k, v] : entries) {
    if (k == "kernel") setters().at(k)(cfg, k, v);
  }
  for (const auto& [k, v] : entries) {
    if (k != "kernel") setters().at(k)(cfg, k, v);
  }
  try {
    cfg.problem.kernel.validate();
    cfg.opts.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (cfg.md_k0 < 2) throw Error(ErrorCode::ParseError, "k0 must be >= 2 for pnt-md");
  if (cfg.output_dir.empty()) cfg.output_dir = "out/" + cfg.problem.name;
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  return parse_config(in);
}

std::string resolved_config(const ExperimentConfig& cfg) {
  std::ostringstream o;
  const auto& p = cfg.problem;
  o << "problem = " << p.name << '\n';
  if (p.name == "blur") {
    o << "problem.side = " << p.side << '\n'
      << "problem.psf_sigma = " << fmt(p.psf_sigma) << '\n'
      << "problem.psf_radius = " << p.psf_radius << '\n';
  } else {
    o << "problem.n = " << p.n << '\n';
  }
  o << "noise.level = " << fmt(p.noise.level) << '\n'
    << "noise.kind = " << to_string(p.noise.kind) << '\n'
    << "noise.seed = " << p.noise.seed << '\n'
    << "kernel.kind = " << kernel_kind_name(p.kernel.kind) << '\n'
    << "kernel.l = " << fmt(p.kernel.length_scale) << '\n';
  if (p.kernel.kind != KernelKind::Gaussian) o << "kernel.nu = " << fmt(p.kernel.nu) << '\n';
  o << "kernel.jitter = " << fmt(p.jitter) << '\n'
    << "tau = " << fmt(cfg.opts.tau) << '\n'
    << "lambda0 = " << fmt(cfg.opts.lambda0) << '\n'
    << "c = " << fmt(cfg.opts.c) << '\n'
    << "eta = " << fmt(cfg.opts.eta) << '\n'
    << "tol = " << fmt(cfg.opts.tol) << '\n'
    << "dp_tol = " << fmt(cfg.opts.dp_tol) << '\n'
    << "max_iters = " << cfg.opts.max_iters << '\n'
    << "min_step = " << fmt(cfg.opts.min_step) << '\n'
    << "k0 = " << cfg.md_k0 << '\n'
    << "reorthogonalize = " << (cfg.opts.reorthogonalize ? "true" : "false") << '\n'
    << "check_assumption = " << (cfg.opts.check_assumption ? "true" : "false") << '\n'
    << "stop = " << stop_name(cfg.opts.stop) << '\n';
  o << "solvers = ";
  for (std::size_t i = 0; i < cfg.solvers.size(); ++i) o << (i ? "," : "") << cfg.solvers[i];
  o << '\n'
    << "oracles = " << oracle_name(cfg.oracles) << '\n'
    << "output.dir = " << cfg.output_dir << '\n';
  return o.str();
}

fs::path output_path(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  if (dir.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) dir = fs::path(root) / dir;
  }
  return dir;
}

void write_trace(std::ostream& out, const std::vector<IterationRecord>& history) {
  out << kTraceHeader << '\n';
  for (const auto& r : history) {
    out << r.k << ',' << fmt(r.lambda) << ',' << fmt(r.merit_h) << ',' << fmt(r.residual_mnorm)
        << ',' << fmt(r.gamma) << ',' << r.backtracks << ',' << fmt(r.cond_j) << ','
        << (r.rel_error ? fmt(*r.rel_error) : std::string("nan")) << '\n';
  }
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  ProblemInstance p;
  try {
    problems::ProblemSpec spec = cfg.problem;
    spec.tau = cfg.opts.tau;
    p = problems::build_problem(spec);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }

  const fs::path dir = output_path(cfg);
  try {
    fs::create_directories(dir);
    std::ofstream(dir / "config.resolved") << resolved_config(cfg);

    PntOptions opts = cfg.opts;
    if (opts.check_assumption && dense_fits(p)) {
      const auto rep = problems::check_assumption(p);
      if (rep.status != problems::Assumption::Holds) {
        log << "error: AssumptionViolated: feasibility check " << problems::to_string(rep.status)
            << " (min residual^2 " << rep.min_residual_sq << ", tau m " << rep.tau_m
            << ", ||b||^2 " << rep.b_norm_sq << ")\n";
        return 1;
      }
    }
    opts.check_assumption = false;

    const bool oracles = oracles_enabled(cfg, p) && dense_fits(p);
    std::optional<DenseProblem> dense;
    auto need_dense = [&]() -> const DenseProblem& {
      if (!dense) dense = baselines::make_dense_problem(p, opts.tau);
      return *dense;
    };

    std::vector<ArmOutcome> arms;
    for (const auto& solver : cfg.solvers) {
      ArmOutcome arm;
      arm.solver = solver;
      if (solver == "pnt") {
        const auto t0 = std::chrono::steady_clock::now();
        arm.result = pnt::pnt_solve(p, opts);
        arm.seconds = seconds_since(t0);
      } else if (solver == "pnt-md") {
        PntOptions md = opts;
        md.k0 = cfg.md_k0;
        const auto t0 = std::chrono::steady_clock::now();
        arm.result = pnt::pnt_md_solve(p, md);
        arm.seconds = seconds_since(t0);
      } else {
        const DenseProblem& dp = need_dense();
        const Vector* xt = p.x_true ? &*p.x_true : nullptr;
        const auto t0 = std::chrono::steady_clock::now();
        arm.result = baselines::full_newton_solve(dp, opts, xt);
        arm.seconds = seconds_since(t0);
      }
      log << solver << ": " << to_string(arm.result.status) << " after "
          << arm.result.iterations() << " iterations, lambda = " << fmt(arm.result.lambda) << '\n';

      const fs::path sub = dir / solver;
      fs::create_directories(sub);
      std::ofstream trace(sub / "trace.csv");
      write_trace(trace, arm.result.history);
      write_vector(sub / "solution.txt", arm.result.x);
      std::ofstream meta(sub / "meta.txt");
      meta << "tau_m = " << fmt(tau_m_of(cfg, p.rows())) << '\n'
           << "m = " << p.rows() << '\n'
           << "n = " << p.cols() << '\n'
           << "status = " << to_string(arm.result.status) << '\n';
      arms.push_back(std::move(arm));
    }

    std::optional<LambdaSolution> dp_sol;
    std::optional<LambdaSolution> opt_sol;
    if (oracles) {
      const DenseProblem& dp = need_dense();
      dp_sol = baselines::dp_lambda_bisection(dp);
      if (p.x_true) {
        opt_sol = baselines::optimal_lambda_grid(dp, *p.x_true, baselines::default_lambda_grid());
      }
    }

    auto rel_error = [&](const Vector& x) {
      return p.x_true ? fmt((x - *p.x_true).norm() / p.x_true->norm()) : std::string("nan");
    };
    std::ofstream summary(dir / "summary.csv");
    summary << "solver,status,iterations,seconds,lambda,mu,rel_error,lambda_dp_rel_diff\n";
    for (const auto& arm : arms) {
      const auto& r = arm.result;
      summary << arm.solver << ',' << to_string(r.status) << ',' << r.iterations() << ','
              << fmt(arm.seconds) << ',' << fmt(r.lambda) << ',' << fmt(r.mu) << ','
              << rel_error(r.x) << ','
              << (dp_sol ? fmt(std::abs(r.lambda - dp_sol->lambda) / dp_sol->lambda)
                         : std::string("nan"))
              << '\n';
    }
    if (dp_sol) {
      summary << "dp-bisection,oracle,0,nan," << fmt(dp_sol->lambda) << ','
              << fmt(1.0 / dp_sol->lambda) << ',' << rel_error(dp_sol->x) << ",0\n";
      write_vector(dir / "x_dp.txt", dp_sol->x);
    }
    if (opt_sol) {
      summary << "optimal-grid,oracle,0,nan," << fmt(opt_sol->lambda) << ','
              << fmt(1.0 / opt_sol->lambda) << ',' << rel_error(opt_sol->x) << ','
              << fmt(std::abs(opt_sol->lambda - dp_sol->lambda) / dp_sol->lambda) << '\n';
    }
    log << "wrote " << dir.string() << '\n';
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ParseError ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

std::vector<ScalingRow> run_scaling(const ExperimentConfig& cfg, const std::vector<Index>& sizes,
                                    std::ostream& log) {
  if (sizes.empty()) throw Error(ErrorCode::ParseError, "no sizes given");
  std::vector<ScalingRow> rows;
  PntOptions opts = cfg.opts;
  opts.stop = StopRule::Dp;
  opts.check_assumption = false;
  opts.record_rel_error = false;
  for (const Index n : sizes) {
    problems::ProblemSpec spec = cfg.problem;
    spec.tau = opts.tau;
    if (spec.name == "blur") {
      spec.side = n;
    } else {
      spec.n = n;
    }
    const ProblemInstance p = problems::build_problem(spec);
    for (const auto& solver : cfg.solvers) {
      ScalingRow row;
      row.n = n;
      row.solver = solver;
      PntResult r;
      if (solver == "newton") {
        if (!dense_fits(p)) {
          log << "skipping newton at n = " << n << ": exceeds dense guard\n";
          continue;
        }
        const DenseProblem dp = baselines::make_dense_problem(p, opts.tau);
        const auto t0 = std::chrono::steady_clock::now();
        r = baselines::full_newton_solve(dp, opts);
        row.seconds = seconds_since(t0);
      } else {
        PntOptions o = opts;
        if (solver == "pnt-md") o.k0 = cfg.md_k0;
        const auto t0 = std::chrono::steady_clock::now();
        r = solver == "pnt-md" ? pnt::pnt_md_solve(p, o) : pnt::pnt_solve(p, o);
        row.seconds = seconds_since(t0);
      }
      row.iterations = r.iterations();
      log << "n = " << n << ' ' << solver << ": " << to_string(r.status) << ", "
          << row.iterations << " iterations, " << fmt(row.seconds) << " s\n";
      rows.push_back(row);
    }
  }
  const fs::path dir = output_path(cfg);
  fs::create_directories(dir);
  std::ofstream out(dir / "scaling.csv");
  out << "n,solver,iterations,seconds\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.solver << ',' << r.iterations << ',' << fmt(r.seconds) << '\n';
  }
  return rows;
}

VerifyReport verify_trace(const fs::path& trace, std::optional<double> tau_m) {
  if (!tau_m) {
    const fs::path meta = trace.parent_path() / "meta.txt";
    std::ifstream in(meta);
    if (!in) throw Error(ErrorCode::IoError, "no --tau-m given and cannot read " + meta.string());
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq != std::string::npos && trim(line.substr(0, eq)) == "tau_m") {
        tau_m = to_double("tau_m", trim(line.substr(eq + 1)));
      }
    }
    if (!tau_m) throw Error(ErrorCode::ParseError, meta.string() + " has no tau_m");
  }

  std::ifstream in(trace);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + trace.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader) {
    throw Error(ErrorCode::ParseError, trace.string() + ": unexpected header");
  }
  VerifyReport rep;
  const double floor = std::sqrt(*tau_m) * (1.0 - 1e-12);
  double prev_merit = std::numeric_limits<double>::infinity();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(trim(cell));
    if (cols.size() != 8) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 8 columns");
    }
    const double merit = to_double("merit_h", cols[2]);
    const double res = to_double("residual_mnorm", cols[3]);
    if (merit > prev_merit) {
      rep.merit_monotone = false;
      rep.problems.push_back("line " + std::to_string(line_no) + ": merit increased to " + cols[2]);
    }
    if (res < floor) {
      rep.residual_floor = false;
      rep.problems.push_back("line " + std::to_string(line_no) + ": residual " + cols[3] +
                             " below floor " + fmt(floor));
    }
    prev_merit = merit;
    ++rep.rows;
  }
  if (rep.rows == 0) throw Error(ErrorCode::ParseError, trace.string() + ": no data rows");
  return rep;
}

}  // namespace pnewton::experiment
