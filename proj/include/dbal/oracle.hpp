#ifndef DBAL_ORACLE_HPP
#define DBAL_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dbal/classes.hpp"
#include "dbal/learners.hpp"
#include "dbal/losses.hpp"
#include "dbal/synth.hpp"

namespace dbal {

struct DiscreteScenario {
  const Problem* problem = nullptr;  // discrete marginal
  const FunctionClass* cls = nullptr;  // finite class on the atoms
  int m = 0;                           // sample size
};

// E[sup_{h,g} (R(h) - R_hat(h)) - (R(g) - R_hat(g))] by full enumeration of
// the (atom, label)^m outcome tree. Refuses silently-approximate work: the
// outcome count must stay under 10^6.
inline double exact_phi(const DiscreteScenario& sc, const SurrogateLoss& loss) {
  const Problem& p = *sc.problem;
  const FunctionClass& cls = *sc.cls;
  if (p.marginal != MarginalKind::discrete_atoms)
    throw std::invalid_argument("exact_phi requires a discrete marginal");
  std::size_t na = p.atom_x.size(), nm = cls.members.size();
  double outcomes = std::pow(2.0 * static_cast<double>(na),
                             static_cast<double>(sc.m));
  if (!(outcomes <= 1e6))
    throw std::invalid_argument("outcome tree too large for exact_phi");

  // per-(atom,label) probabilities and per-member losses
  std::vector<double> prob(2 * na);
  std::vector<std::vector<double>> lv(nm, std::vector<double>(2 * na));
  for (std::size_t a = 0; a < na; ++a) {
    prob[2 * a] = p.atom_mass[a] * p.atom_eta[a];          // y = +1
    prob[2 * a + 1] = p.atom_mass[a] * (1.0 - p.atom_eta[a]);  // y = -1
    for (std::size_t i = 0; i < nm; ++i) {
      lv[i][2 * a] = eval_loss(loss, cls.members[i][a]);
      lv[i][2 * a + 1] = eval_loss(loss, -cls.members[i][a]);
    }
  }
  std::vector<double> true_risk(nm, 0.0);
  for (std::size_t i = 0; i < nm; ++i)
    for (std::size_t o = 0; o < 2 * na; ++o)
      true_risk[i] += prob[o] * lv[i][o];

  double total = 0.0;
  std::vector<std::size_t> pick(sc.m, 0);
  std::vector<double> emp(nm);
  while (true) {
    double w = 1.0;
    std::fill(emp.begin(), emp.end(), 0.0);
    for (int k = 0; k < sc.m; ++k) {
      w *= prob[pick[k]];
      for (std::size_t i = 0; i < nm; ++i) emp[i] += lv[i][pick[k]];
    }
    if (w > 0.0) {
      double vmax = -kInf, vmin = kInf;
      for (std::size_t i = 0; i < nm; ++i) {
        double dev = true_risk[i] - emp[i] / sc.m;
        vmax = std::max(vmax, dev);
        vmin = std::min(vmin, dev);
      }
      total += w * (vmax - vmin);
    }
    int k = sc.m - 1;
    while (k >= 0 && ++pick[k] == 2 * na) pick[k--] = 0;
    if (k < 0) break;
  }
  return total;
}

// Gamma(eps) = min excess surrogate risk among class members whose excess
// classification error exceeds eps; +infinity when no member does.
inline double exact_gamma_transform(const Problem& p, const FunctionClass& cls,
                                    const SurrogateLoss& loss, double eps) {
  if (cls.kind != ClassKind::finite)
    throw std::invalid_argument("exact_gamma_transform needs a finite class");
  double best = kInf;
  for (const auto& h : cls.members) {
    if (excess_error(p, cls, h) > eps)
      best = std::min(best, excess_surrogate(p, cls, h, loss));
  }
  return best;
}

// Reference ERM oracles. finite: plain enumeration. monotone_grid with the
// quadratic loss: exact solve by enumerating every consecutive block
// partition of the sampled cells (<= 8 samples), taking clamped weighted
// means per block, and keeping the best feasible candidate.
inline Fn brute_erm(const FunctionClass& cls, const SurrogateLoss& loss,
                    const std::vector<LabeledSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("brute_erm: empty sample");
  if (cls.kind == ClassKind::finite) {
    std::size_t best = 0;
    double best_v = kInf;
    for (std::size_t i = 0; i < cls.members.size(); ++i) {
      double v = empirical_risk(cls, loss, cls.members[i], samples);
      if (v < best_v - 1e-15) { best_v = v; best = i; }
    }
    return cls.members[best];
  }
  if (cls.kind != ClassKind::monotone_grid ||
      loss.kind != LossKind::quadratic)
    throw UnsupportedClassKind("brute_erm: finite or monotone+quadratic only");

  // aggregate samples per cell, sorted by cell index
  std::vector<double> wsum(cls.grid, 0.0), ysum(cls.grid, 0.0);
  for (const auto& s : samples) {
    int c = cls.cell_of(s.x);
    wsum[c] += 1.0;
    ysum[c] += s.y;
  }
  std::vector<int> cells;
  std::vector<double> w, ybar;
  for (int j = 0; j < cls.grid; ++j)
    if (wsum[j] > 0.0) {
      cells.push_back(j);
      w.push_back(wsum[j]);
      ybar.push_back(ysum[j] / wsum[j]);
    }
  std::size_t k = cells.size();
  if (k > 8)
    throw std::invalid_argument("brute_erm: more than 8 occupied cells");

  auto objective = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      // sum over samples in cell i of (v - y)^2 expands around the mean
      s += w[i] * (v[i] - ybar[i]) * (v[i] - ybar[i]);
    }
    return s;
  };

  std::vector<double> best_v;
  double best_obj = kInf;
  std::uint32_t masks = k >= 1 ? (1u << (k - 1)) : 1;
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    // bit i set -> block boundary between sample-cells i and i+1
    std::vector<double> v(k);
    std::size_t start = 0;
    bool ok = true;
    double prev = -kInf;
    for (std::size_t i = 0; i < k; ++i) {
      if (i + 1 == k || (mask >> i) & 1u) {
        double tw = 0.0, ty = 0.0;
        for (std::size_t j = start; j <= i; ++j) {
          tw += w[j];
          ty += w[j] * ybar[j];
        }
        double mean = std::clamp(ty / tw, -1.0, 1.0);
        if (mean < prev - 1e-12) { ok = false; break; }
        for (std::size_t j = start; j <= i; ++j) v[j] = mean;
        prev = mean;
        start = i + 1;
      }
    }
    if (!ok) continue;
    double obj = objective(v);
    if (obj < best_obj - 1e-15) {
      best_obj = obj;
      best_v = v;
    }
  }

  // expand to the full grid, carrying values left of the first sampled cell
  Fn f(cls.grid, best_v.empty() ? 0.0 : best_v.front());
  std::size_t idx = 0;
  double cur = best_v.empty() ? 0.0 : best_v.front();
  for (int j = 0; j < cls.grid; ++j) {
    if (idx < cells.size() && cells[idx] == j) cur = best_v[idx++];
    f[j] = cur;
  }
  return f;
}

}  // namespace dbal

#endif  // DBAL_ORACLE_HPP
