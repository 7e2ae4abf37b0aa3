#ifndef DBAL_BENCH_HPP
#define DBAL_BENCH_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dbal/classes.hpp"
#include "dbal/complexity.hpp"
#include "dbal/learners.hpp"
#include "dbal/losses.hpp"
#include "dbal/rng.hpp"
#include "dbal/synth.hpp"

namespace dbal {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat dotted-key config document: `key = value` lines, '#' comments.
// Unknown keys are hard errors — silent typos corrupt benchmark provenance.
struct ExperimentConfig {
  LossKind loss_kind = LossKind::quadratic;
  double f_bar = 1.0;

  std::string problem = "two_point";  // two_point | threshold | monotone
  double tp_z = 0.25, tp_eps0 = 0.1, tp_eta_x0 = 0.75;
  double th_t = 0.5, th_alpha = 1.0, th_z = 0.25;
  int grid = 32;

  std::string method = "active";  // active | passive | both
  ThresholdParams thr;            // vc_dim filled from the class when vc = 0
  int vc_override = 0;

  std::uint64_t u = 4096, n = 256, m = 256;
  int trials = 50;
  std::uint64_t master_seed = 1;

  std::vector<double> sweep_eps;  // empty unless sweeping
  std::uint64_t sweep_max_active = 4096;
  std::uint64_t sweep_max_passive = 1 << 20;
  std::uint64_t sweep_u = 1 << 16;

  std::string out;
  bool timing = false;  // real wall_ms breaks byte-identical output
  int jobs = 1;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("field '" + key + "': not a number: '" + v + "'");
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d < 0.0 || d != std::floor(d))
    throw ConfigError("field '" + key + "': not a nonnegative integer");
  return static_cast<std::uint64_t>(d);
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    try {
      if (key == "loss") c.loss_kind = loss_kind_from_name(val);
      else if (key == "loss.f_bar") c.f_bar = detail::to_double(key, val);
      else if (key == "problem") {
        if (val != "two_point" && val != "threshold" && val != "monotone")
          throw ConfigError("unknown problem kind: " + val);
        c.problem = val;
      } else if (key == "problem.two_point.z")
        c.tp_z = detail::to_double(key, val);
      else if (key == "problem.two_point.eps0")
        c.tp_eps0 = detail::to_double(key, val);
      else if (key == "problem.two_point.eta_x0")
        c.tp_eta_x0 = detail::to_double(key, val);
      else if (key == "problem.threshold.t")
        c.th_t = detail::to_double(key, val);
      else if (key == "problem.threshold.alpha")
        c.th_alpha = detail::to_double(key, val);
      else if (key == "problem.threshold.z")
        c.th_z = detail::to_double(key, val);
      else if (key == "class.grid")
        c.grid = static_cast<int>(detail::to_u64(key, val));
      else if (key == "method") {
        if (val != "active" && val != "passive" && val != "both")
          throw ConfigError("unknown method: " + val);
        c.method = val;
      } else if (key == "threshold.variant")
        c.thr.variant = threshold_variant_from_name(val);
      else if (key == "threshold.c0") c.thr.c0 = detail::to_double(key, val);
      else if (key == "threshold.scale")
        c.thr.constant_scale = detail::to_double(key, val);
      else if (key == "threshold.delta")
        c.thr.delta = detail::to_double(key, val);
      else if (key == "threshold.vc")
        c.vc_override = static_cast<int>(detail::to_u64(key, val));
      else if (key == "budgets.u") c.u = detail::to_u64(key, val);
      else if (key == "budgets.n") c.n = detail::to_u64(key, val);
      else if (key == "budgets.m") c.m = detail::to_u64(key, val);
      else if (key == "trials")
        c.trials = static_cast<int>(detail::to_u64(key, val));
      else if (key == "master_seed") c.master_seed = detail::to_u64(key, val);
      else if (key == "eps") {
        std::stringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ','))
          c.sweep_eps.push_back(detail::to_double(key, detail::trim(tok)));
        for (std::size_t i = 1; i < c.sweep_eps.size(); ++i)
          if (c.sweep_eps[i] >= c.sweep_eps[i - 1])
            throw ConfigError("eps list must be strictly decreasing");
      } else if (key == "sweep.max_active")
        c.sweep_max_active = detail::to_u64(key, val);
      else if (key == "sweep.max_passive")
        c.sweep_max_passive = detail::to_u64(key, val);
      else if (key == "sweep.u") c.sweep_u = detail::to_u64(key, val);
      else if (key == "out") c.out = val;
      else if (key == "timing") c.timing = detail::to_u64(key, val) != 0;
      else
        throw ConfigError("unknown key: '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": field '" + key +
                        "': " + e.what());
    }
  }
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.grid < 2) throw ConfigError("class.grid must be >= 2");
  return c;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

// Problem + class instantiation; `eps0` overrides the two-point mass (the
// sweep ties the construction's hardness to each target eps).
struct Instance {
  Problem problem;
  FunctionClass cls;
  SurrogateLoss loss;
  ThresholdParams thr;
};

inline Instance make_instance(const ExperimentConfig& c, double eps0_override = 0.0) {
  Instance inst;
  inst.loss = make_loss(c.loss_kind, c.f_bar);
  if (c.problem == "two_point") {
    double eps0 = eps0_override > 0.0 ? eps0_override : c.tp_eps0;
    inst.problem = make_two_point(c.tp_z, eps0, c.tp_eta_x0, inst.loss);
    inst.cls = two_point_class(inst.problem, /*fstar_first=*/false);
    // members are bounded by |f*| at the atoms, not by f_bar
    inst.loss = make_loss(c.loss_kind, inst.cls.f_bar);
  } else if (c.problem == "threshold") {
    inst.problem =
        make_discrete_threshold(c.grid, c.th_t, c.th_z, inst.loss);
    inst.cls = make_threshold_grid_class(c.grid);
    inst.loss = make_loss(c.loss_kind, inst.cls.f_bar);
  } else {  // monotone
    inst.problem = make_monotone_linear(inst.loss);
    inst.cls = make_monotone_class(c.grid, 1.0);
    inst.loss = make_loss(c.loss_kind, 1.0);
  }
  inst.thr = c.thr;
  inst.thr.vc_dim =
      c.vc_override > 0 ? c.vc_override : default_vc_dim(inst.cls);
  return inst;
}

struct ResultRow {
  int trial = 0;
  std::string method;
  double eps = 0.0;
  std::uint64_t labels_used = 0;
  std::uint64_t unlabeled_used = 0;
  double excess_error = 0.0;
  double excess_surrogate = 0.0;
  int success = 1;
  std::uint64_t seed = 0;
  std::uint64_t wall_ms = 0;
};

inline const char* kCsvHeader =
    "trial,method,eps,labels_used,unlabeled_used,excess_error,"
    "excess_surrogate,success,seed,wall_ms";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.trial << ',' << r.method << ',' << format_double(r.eps) << ','
        << r.labels_used << ',' << r.unlabeled_used << ','
        << format_double(r.excess_error) << ','
        << format_double(r.excess_surrogate) << ',' << r.success << ','
        << r.seed << ',' << r.wall_ms << "\n";
  }
}

namespace detail {

// Work pool over trial indices; rows land at fixed positions, so the output
// order is deterministic regardless of completion order.
template <typename Work>
inline void for_each_trial(int trials, int jobs, Work&& work) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int i = 0; i < trials; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1))
        work(i);
    });
  for (auto& th : pool) th.join();
}

inline ResultRow run_one_trial(const Instance& inst, const std::string& method,
                               std::uint64_t u, std::uint64_t n,
                               std::uint64_t m, double eps, int trial,
                               std::uint64_t seed, bool timing) {
  auto t0 = std::chrono::steady_clock::now();
  Algorithm1Result res =
      method == "active"
          ? run_algorithm1(inst.problem, inst.cls, inst.loss, u, n, inst.thr,
                           seed)
          : run_erm_passive(inst.problem, inst.cls, inst.loss, m, seed);
  ResultRow row;
  row.trial = trial;
  row.method = method;
  row.eps = eps;
  row.labels_used = res.record.labels_used;
  row.unlabeled_used = res.record.unlabeled_used;
  row.excess_error = res.record.final_excess_error;
  row.excess_surrogate = res.record.final_excess_surrogate;
  row.success = res.record.failed ? 0
                : eps > 0.0       ? (row.excess_error < eps ? 1 : 0)
                                  : 1;
  row.seed = seed;
  if (timing)
    row.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - t0)
            .count());
  return row;
}

}  // namespace detail

// Fixed (u, n) / m campaign: `trials` rows per requested method.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& c) {
  Instance inst = make_instance(c);
  std::vector<std::string> methods;
  if (c.method == "active" || c.method == "both") methods.push_back("active");
  if (c.method == "passive" || c.method == "both")
    methods.push_back("passive");
  std::vector<ResultRow> rows(methods.size() * c.trials);
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    detail::for_each_trial(c.trials, c.jobs, [&, mi](int i) {
      rows[mi * c.trials + i] = detail::run_one_trial(
          inst, methods[mi], c.u, c.n, c.m, 0.0, i,
          trial_seed(c.master_seed, static_cast<std::uint64_t>(i)), c.timing);
    });
  }
  return rows;
}

struct SweepCell {
  double eps = 0.0;
  std::string method;
  std::uint64_t budget_found = 0;
  double success_rate = 0.0;
  bool bound_exceeded = false;
};

namespace detail {

// Median excess error over `trials` fixed-seed trials at one budget.
inline std::pair<double, double> eval_budget(const Instance& inst,
                                             const ExperimentConfig& c,
                                             const std::string& method,
                                             std::uint64_t budget, double eps) {
  std::vector<double> ex(c.trials);
  int ok = 0;
  std::vector<int> succ(c.trials, 0);
  for_each_trial(c.trials, c.jobs, [&](int i) {
    ResultRow row =
        run_one_trial(inst, method, c.sweep_u, budget, budget, eps, i,
                      trial_seed(c.master_seed, static_cast<std::uint64_t>(i)),
                      false);
    ex[i] = row.excess_error;
    succ[i] = row.success;
  });
  for (int s : succ) ok += s;
  std::sort(ex.begin(), ex.end());
  double med = c.trials % 2 == 1
                   ? ex[c.trials / 2]
                   : 0.5 * (ex[c.trials / 2 - 1] + ex[c.trials / 2]);
  return {med, static_cast<double>(ok) / c.trials};
}

}  // namespace detail

// For each target eps: smallest label budget at which the median trial's
// excess error beats eps (strictly — the two-point construction places a
// decoy at excess exactly eps). Doubling then bisection; a cell whose search
// bound is exceeded is marked, never fatal.
inline std::vector<SweepCell> sweep(const ExperimentConfig& c) {
  if (c.sweep_eps.empty()) throw ConfigError("sweep requires an eps list");
  std::vector<std::string> methods;
  if (c.method == "active" || c.method == "both") methods.push_back("active");
  if (c.method == "passive" || c.method == "both")
    methods.push_back("passive");
  std::vector<SweepCell> cells;
  for (double eps : c.sweep_eps) {
    // the two-point construction is re-instantiated at hardness eps
    Instance inst = make_instance(c, c.problem == "two_point" ? eps : 0.0);
    for (const auto& method : methods) {
      std::uint64_t cap =
          method == "active" ? c.sweep_max_active : c.sweep_max_passive;
      SweepCell cell;
      cell.eps = eps;
      cell.method = method;
      std::uint64_t hi = 1, lo = 0;
      double rate = 0.0;
      bool found = false;
      while (hi <= cap) {
        auto [med, r] = detail::eval_budget(inst, c, method, hi, eps);
        if (med < eps) { found = true; rate = r; break; }
        lo = hi;
        hi *= 2;
      }
      if (!found) {
        cell.bound_exceeded = true;
        cell.budget_found = cap;
        cells.push_back(cell);
        continue;
      }
      while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        auto [med, r] = detail::eval_budget(inst, c, method, mid, eps);
        if (med < eps) { hi = mid; rate = r; }
        else lo = mid;
      }
      cell.budget_found = hi;
      cell.success_rate = rate;
      cells.push_back(cell);
    }
  }
  return cells;
}

inline void write_sweep_csv(const std::vector<SweepCell>& cells,
                            std::ostream& out) {
  out << "eps,method,budget_found,success_rate,bound_exceeded\n";
  for (const auto& cell : cells)
    out << format_double(cell.eps) << ',' << cell.method << ','
        << cell.budget_found << ',' << format_double(cell.success_rate) << ','
        << (cell.bound_exceeded ? 1 : 0) << "\n";
}

// Data-only plot artifact: budget vs eps on log-log axes.
inline void write_sweep_svg(const std::vector<SweepCell>& cells,
                            std::ostream& out) {
  const int W = 640, H = 480, M = 60;
  double lx0 = kInf, lx1 = -kInf, ly0 = kInf, ly1 = -kInf;
  for (const auto& cell : cells) {
    double lx = std::log10(cell.eps);
    double ly = std::log10(std::max<double>(cell.budget_found, 1));
    lx0 = std::min(lx0, lx); lx1 = std::max(lx1, lx);
    ly0 = std::min(ly0, ly); ly1 = std::max(ly1, ly);
  }
  if (!(lx1 > lx0)) { lx0 -= 0.5; lx1 += 0.5; }
  if (!(ly1 > ly0)) { ly0 -= 0.5; ly1 += 0.5; }
  auto px = [&](double lx) { return M + (lx - lx0) / (lx1 - lx0) * (W - 2 * M); };
  auto py = [&](double ly) { return H - M - (ly - ly0) / (ly1 - ly0) * (H - 2 * M); };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const char* colors[] = {"#1f77b4", "#d62728"};
  std::vector<std::string> methods;
  for (const auto& cell : cells)
    if (std::find(methods.begin(), methods.end(), cell.method) ==
        methods.end())
      methods.push_back(cell.method);
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[mi % 2]
        << "\" stroke-width=\"2\" points=\"";
    for (const auto& cell : cells)
      if (cell.method == methods[mi])
        out << px(std::log10(cell.eps)) << ','
            << py(std::log10(std::max<double>(cell.budget_found, 1))) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << (W - M + 4) << "\" y=\"" << (M + 20 * mi)
        << "\" font-size=\"12\">" << methods[mi] << "</text>\n";
  }
  out << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 15)
      << "\" font-size=\"12\" text-anchor=\"middle\">eps (log)</text>\n"
      << "<text x=\"15\" y=\"" << (H / 2)
      << "\" font-size=\"12\" transform=\"rotate(-90 15 " << (H / 2)
      << ")\" text-anchor=\"middle\">budget (log)</text>\n</svg>\n";
}

}  // namespace dbal

#endif  // DBAL_BENCH_HPP
