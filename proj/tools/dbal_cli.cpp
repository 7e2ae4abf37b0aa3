// Command-line harness: seeded benchmark campaigns (run, sweep), diagnostic
// tables (theta, calibration), and brute-force oracle spot checks (oracle).
// Exit codes: 0 success, 2 config error, 3 infeasibility under --strict.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dbal/bench.hpp"
#include "dbal/oracle.hpp"
#include "dbal/synth.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  int jobs = 1;
  bool strict = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "config file path");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "override master_seed")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--out", o.out, "output path (default: stdout)");
  cmd->add_option("--trials", o.trials, "override trial count");
  cmd->add_option("--jobs", o.jobs, "worker threads");
  cmd->add_flag("--strict", o.strict,
                "exit 3 if any trial is marked infeasible");
}

dbal::ExperimentConfig load_config(const CommonOpts& o) {
  dbal::ExperimentConfig cfg = dbal::parse_config_file(o.config);
  if (o.seed_set) cfg.master_seed = o.seed;
  if (o.trials > 0) cfg.trials = o.trials;
  cfg.jobs = o.jobs;
  if (!o.out.empty()) cfg.out = o.out;
  return cfg;
}

int emit(const CommonOpts& o, const std::string& text,
         const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open output file: " << path << "\n";
    return 2;
  }
  f << text;
  (void)o;
  return 0;
}

int cmd_run(const CommonOpts& o) {
  dbal::ExperimentConfig cfg = load_config(o);
  auto rows = dbal::run_experiment(cfg);
  std::ostringstream csv;
  dbal::write_csv(rows, csv);
  int rc = emit(o, csv.str(), cfg.out);
  if (rc != 0) return rc;
  if (o.strict)
    for (const auto& r : rows)
      if (r.success == 0 && r.eps == 0.0) return 3;
  return 0;
}

int cmd_sweep(const CommonOpts& o) {
  dbal::ExperimentConfig cfg = load_config(o);
  auto cells = dbal::sweep(cfg);
  std::ostringstream csv;
  dbal::write_sweep_csv(cells, csv);
  int rc = emit(o, csv.str(), cfg.out);
  if (rc != 0) return rc;
  if (!cfg.out.empty()) {
    std::ostringstream svg;
    dbal::write_sweep_svg(cells, svg);
    std::ofstream f(cfg.out + ".svg", std::ios::binary);
    if (f) f << svg.str();
  }
  return 0;
}

int cmd_theta(const CommonOpts& o) {
  dbal::ExperimentConfig cfg = load_config(o);
  dbal::Instance inst = dbal::make_instance(cfg);
  auto est = dbal::estimate_disagreement_coefficient(
      inst.problem, inst.cls, inst.loss, 0.01, cfg.master_seed);
  std::ostringstream out;
  out << "r,dis_mass,ratio,theta_running_sup\n";
  for (const auto& pt : est.trace)
    out << dbal::format_double(pt.r) << ','
        << dbal::format_double(pt.dis_mass) << ','
        << dbal::format_double(pt.ratio) << ','
        << dbal::format_double(pt.running_sup) << "\n";
  return emit(o, out.str(), cfg.out);
}

int cmd_calibration(const CommonOpts& o) {
  std::ostringstream out;
  out << "loss,x,psi_tilde,psi,closed_form,abs_diff\n";
  for (auto kind :
       {dbal::LossKind::exponential, dbal::LossKind::hinge,
        dbal::LossKind::quadratic, dbal::LossKind::truncated_quadratic,
        dbal::LossKind::zero_one}) {
    double fb = kind == dbal::LossKind::exponential ? 10.0 : 1.0;
    dbal::SurrogateLoss loss = dbal::make_loss(kind, fb);
    dbal::CalibrationTable table(loss);
    for (int i = 0; i <= 100; ++i) {
      double x = i / 100.0;
      double env = table.psi_envelope(x);
      double cf = loss.closed_form_psi(x);
      out << dbal::loss_kind_name(kind) << ',' << dbal::format_double(x)
          << ',' << dbal::format_double(table.psi_tilde_at(x)) << ','
          << dbal::format_double(env) << ',' << dbal::format_double(cf) << ','
          << dbal::format_double(std::abs(env - cf)) << "\n";
    }
  }
  return emit(o, out.str(), o.out);
}

int cmd_oracle(const CommonOpts& o, double eps) {
  dbal::SurrogateLoss loss = dbal::make_loss(dbal::LossKind::quadratic, 1.0);
  dbal::Problem p = dbal::make_two_point(0.25, 0.1, 0.75, loss);
  dbal::FunctionClass cls = dbal::two_point_class(p, false);
  std::ostringstream out;
  double gamma = dbal::exact_gamma_transform(p, cls, loss, eps);
  out << "two-point scenario (z=0.25, eps0=0.1, eta_x0=0.75), quadratic\n";
  out << "exact_gamma_transform(eps=" << eps << ") = "
      << (std::isinf(gamma) ? std::string("inf")
                            : dbal::format_double(gamma))
      << "\n";
  dbal::DiscreteScenario sc{&p, &cls, 4};
  out << "exact_phi(m=4) = " << dbal::format_double(dbal::exact_phi(sc, loss))
      << "\n";
  return emit(o, out.str(), o.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disagreement-based active learning benchmark harness"};
  app.require_subcommand(1);

  CommonOpts run_o, sweep_o, theta_o, cal_o, oracle_o;
  double oracle_eps = 0.05;

  add_common(app.add_subcommand("run", "fixed-budget campaign"), run_o, true);
  add_common(app.add_subcommand("sweep", "label-complexity budget search"),
             sweep_o, true);
  add_common(app.add_subcommand("theta", "disagreement coefficient trace"),
             theta_o, true);
  add_common(app.add_subcommand("calibration", "psi transform tables"), cal_o,
             false);
  auto* oracle_cmd =
      app.add_subcommand("oracle", "brute-force reference spot checks");
  add_common(oracle_cmd, oracle_o, false);
  oracle_cmd->add_option("--eps", oracle_eps, "gamma transform target");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) return cmd_run(run_o);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_o);
    if (app.got_subcommand("theta")) return cmd_theta(theta_o);
    if (app.got_subcommand("calibration")) return cmd_calibration(cal_o);
    if (app.got_subcommand("oracle")) return cmd_oracle(oracle_o, oracle_eps);
  } catch (const dbal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
