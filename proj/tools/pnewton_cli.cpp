// pnewton: run, scaling and verify subcommands.

#include <CLI11.hpp>
#include <iostream>

#include "pnewton/error.hpp"
#include "pnewton/experiment.hpp"

using namespace pnewton;

int main(int argc, char** argv) {
  CLI::App app{"Projected Newton experiments for Tikhonov regularization"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run the solvers configured in a config file");
  run->add_option("config", config_path, "key = value config file")->required();

  std::string scaling_config;
  std::vector<long long> sizes;
  CLI::App* scaling = app.add_subcommand("scaling", "time solvers over problem sizes");
  scaling->add_option("config", scaling_config, "key = value config file")->required();
  scaling->add_option("--sizes", sizes, "problem sizes")->required()->expected(1, -1);

  std::string trace_path;
  double tau_m = 0.0;
  CLI::App* verify = app.add_subcommand("verify", "re-check a trace.csv");
  verify->add_option("trace", trace_path, "trace.csv written by run")->required();
  CLI::Option* tau_opt = verify->add_option("--tau-m", tau_m, "tau times m; default: meta.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      return experiment::run_experiment(experiment::load_config(config_path), std::cerr);
    }
    if (*scaling) {
      std::vector<Index> ns;
      for (long long s : sizes) {
        if (s <= 0) throw Error(ErrorCode::ParseError, "sizes must be positive");
        ns.push_back(static_cast<Index>(s));
      }
      const auto cfg = experiment::load_config(scaling_config);
      experiment::run_scaling(cfg, ns, std::cerr);
      return 0;
    }
    std::optional<double> tm;
    if (*tau_opt) tm = tau_m;
    const auto rep = experiment::verify_trace(trace_path, tm);
    for (const auto& p : rep.problems) std::cout << p << '\n';
    std::cout << "rows " << rep.rows << ", merit monotone " << (rep.merit_monotone ? "yes" : "no")
              << ", residual floor " << (rep.residual_floor ? "yes" : "no") << '\n';
    return rep.ok() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool usage = e.code() == ErrorCode::ParseError || e.code() == ErrorCode::IoError ||
                       e.code() == ErrorCode::InvalidParam || e.code() == ErrorCode::InvalidSize;
    return usage ? 2 : 1;
  }
}
