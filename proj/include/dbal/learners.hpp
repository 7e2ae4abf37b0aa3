#ifndef DBAL_LEARNERS_HPP
#define DBAL_LEARNERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dbal/batch.hpp"
#include "dbal/classes.hpp"
#include "dbal/complexity.hpp"
#include "dbal/losses.hpp"
#include "dbal/rng.hpp"
#include "dbal/synth.hpp"

namespace dbal {

// Excess misclassification error er(h) - er(f*) under the problem's
// distribution (exact sums over atoms; midpoint quadrature on [0,1]).
inline double excess_error(const Problem& p, const FunctionClass& cls,
                           const Fn& h) {
  if (p.marginal == MarginalKind::discrete_atoms) {
    double e = 0.0;
    for (std::size_t i = 0; i < p.atom_x.size(); ++i) {
      if (sgn(eval_fn(cls, h, p.atom_x[i])) != sgn(2.0 * p.atom_eta[i] - 1.0))
        e += p.atom_mass[i] * std::abs(2.0 * p.atom_eta[i] - 1.0);
    }
    return e;
  }
  const int kQuad = 8192;
  double e = 0.0;
  for (int i = 0; i < kQuad; ++i) {
    double x = (i + 0.5) / kQuad;
    double eta = p.eta(x);
    if (sgn(eval_fn(cls, h, x)) != sgn(2.0 * eta - 1.0))
      e += std::abs(2.0 * eta - 1.0);
  }
  return e / kQuad;
}

// Excess surrogate risk R(h) - R(f*).
inline double excess_surrogate(const Problem& p, const FunctionClass& cls,
                               const Fn& h, const SurrogateLoss& loss) {
  if (p.marginal == MarginalKind::discrete_atoms) {
    double e = 0.0;
    for (std::size_t i = 0; i < p.atom_x.size(); ++i) {
      double eta = p.atom_eta[i];
      e += p.atom_mass[i] *
           (conditional_risk(loss, eta, eval_fn(cls, h, p.atom_x[i])) -
            conditional_risk(loss, eta, p.atom_fstar[i]));
    }
    return std::max(e, 0.0);
  }
  const int kQuad = 8192;
  double e = 0.0;
  for (int i = 0; i < kQuad; ++i) {
    double x = (i + 0.5) / kQuad;
    double eta = p.eta(x);
    e += conditional_risk(loss, eta, eval_fn(cls, h, x)) -
         conditional_risk(loss, eta, p.f_star(x));
  }
  return std::max(e / kQuad, 0.0);
}

struct UpdateRecord {
  std::uint64_t m = 0;
  std::uint64_t q = 0;        // labels in the window just consumed
  double t_hat = 0.0;
  double dis_mass = 0.0;      // Monte Carlo estimate after the update
};

struct TrialRecord {
  std::uint64_t labels_used = 0;
  std::uint64_t unlabeled_used = 0;
  std::vector<UpdateRecord> updates;
  double final_excess_error = 0.0;
  double final_excess_surrogate = 0.0;
  bool f_star_retained = true;  // finite classes containing f* only
  bool failed = false;          // version space became infeasible
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

namespace detail {

// Cached disagreement region, refreshed once per version-space update.
// finite: list of feasible members. monotone_grid: the region is a cell
// interval [lo, hi) because attainable cell values are monotone in the cell
// index; it only shrinks, so each refresh bisects inside the previous one.
struct DisCache {
  const FunctionClass* cls = nullptr;
  std::vector<std::size_t> feasible;     // finite
  int lo = 0, hi = 0;                    // monotone interval
  bool whole = true;                     // linear fallback: query every time

  void init(const FunctionClass& c) {
    cls = &c;
    whole = true;
    if (c.kind == ClassKind::monotone_grid) { lo = 0; hi = c.grid; }
  }

  void refresh(const VersionSpace& vs, const SurrogateLoss& loss) {
    whole = false;
    switch (cls->kind) {
      case ClassKind::finite:
        feasible = feasible_members(vs);
        break;
      case ClassKind::monotone_grid: {
        // first cell where a nonnegative value is attainable
        int a = lo, b = hi;
        while (a < b) {
          int mid = (a + b) / 2;
          if (monotone_sign_feasible(vs, loss, mid, true))
            b = mid;
          else
            a = mid + 1;
        }
        int new_lo = a;
        // first cell where a negative value is NOT attainable
        a = std::max(new_lo, lo);
        b = hi;
        while (a < b) {
          int mid = (a + b) / 2;
          if (monotone_sign_feasible(vs, loss, mid, false))
            a = mid + 1;
          else
            b = mid;
        }
        lo = new_lo;
        hi = a;
        break;
      }
      case ClassKind::linear_ball:
        whole = true;  // no cache; fall through to direct queries
        break;
    }
  }

  bool contains(const VersionSpace& vs, const SurrogateLoss& loss,
                double x) const {
    if (whole) {
      if (cls->kind == ClassKind::linear_ball && !vs.constraints.empty())
        return dis_contains(vs, loss, x);
      return true;
    }
    switch (cls->kind) {
      case ClassKind::finite: {
        bool pos = false, neg = false;
        for (std::size_t i : feasible) {
          (sgn(eval_fn(*cls, cls->members[i], x)) > 0 ? pos : neg) = true;
          if (pos && neg) return true;
        }
        return false;
      }
      case ClassKind::monotone_grid: {
        int c = cls->cell_of(x);
        return c >= lo && c < hi;
      }
      case ClassKind::linear_ball:
        return dis_contains(vs, loss, x);
    }
    return true;
  }
};

}  // namespace detail

struct Algorithm1Result {
  Fn h;
  TrialRecord record;
};

// Disagreement-based active learner: stream unlabeled points, request labels
// only inside the disagreement region of the current version space, and at
// every power-of-two stream position shrink the version space to the
// empirical-risk ball of radius T computed from the window's labels.
inline Algorithm1Result run_algorithm1(const Problem& problem,
                                       const FunctionClass& cls,
                                       const SurrogateLoss& loss,
                                       std::uint64_t u, std::uint64_t n,
                                       const ThresholdParams& params,
                                       std::uint64_t seed) {
  VersionSpace vs = make_version_space(cls);
  LabeledBatch q;
  q.bits_seed = hash_combine(seed, 0x62697473u);  // label-sign bit stream
  Rng stream(hash_combine(seed, 0x73747265u));
  TrialRecord rec;
  rec.seed = seed;

  // f* membership tracking (finite classes that actually contain it)
  std::ptrdiff_t fstar_idx = -1;
  if (cls.kind == ClassKind::finite &&
      problem.marginal == MarginalKind::discrete_atoms) {
    for (std::size_t i = 0; i < cls.members.size(); ++i) {
      bool match = true;
      for (std::size_t a = 0; a < cls.atoms.size(); ++a)
        if (std::abs(cls.members[i][a] -
                     problem.atom_fstar[problem.atom_index(cls.atoms[a])]) >
            1e-9) {
          match = false;
          break;
        }
      if (match) { fstar_idx = static_cast<std::ptrdiff_t>(i); break; }
    }
  }

  detail::DisCache cache;
  cache.init(cls);
  cache.refresh(vs, loss);  // DIS of the full class, before any constraint
  RecursionState rec_state;
  Fn witness;
  bool have_witness = false;

  std::uint64_t m = 1, t = 0;
  while (m < u && t < n) {
    ++m;
    double x = problem.sample_x(stream);
    ++rec.unlabeled_used;
    if (cache.contains(vs, loss, x)) {
      int y = problem.sample_y(stream, x);
      q.append(m, x, y);
      ++t;
      ++rec.labels_used;
    }
    if ((m & (m - 1)) == 0) {  // log2(m) integral: update the version space
      double that = 0.0;
      try {
        switch (params.variant) {
          case ThresholdVariant::rademacher:
            that = t_hat_rademacher(vs, loss, q, m, params);
            break;
          case ThresholdVariant::recursive_vc:
            that = t_hat_recursive_vc(rec_state, q.size(), m, loss, params);
            break;
          case ThresholdVariant::strong_convexity:
            that = t_hat_strong_convexity(q.size(), m, loss, params);
            break;
        }
        auto cm = constrained_min_risk(vs, loss, q,
                                       have_witness ? &witness : nullptr);
        vs = with_constraint(vs, loss, q, cm.value + that);
        witness = cm.witness;
        have_witness = true;
        cache.refresh(vs, loss);
      } catch (const InfeasibleVersionSpace&) {
        rec.failed = true;
        break;
      }
      UpdateRecord ur;
      ur.m = m;
      ur.q = q.size();
      ur.t_hat = that;
      {
        // one fixed probe set per trial: a shrinking region then yields a
        // nonincreasing estimate sequence by construction
        Rng diag(hash_combine(seed, 0x64697361u));
        const int kProbe = 10000;
        int in = 0;
        for (int k = 0; k < kProbe; ++k)
          if (cache.contains(vs, loss, problem.sample_x(diag))) ++in;
        ur.dis_mass = static_cast<double>(in) / kProbe;
      }
      rec.updates.push_back(ur);
      if (fstar_idx >= 0) {
        auto feas = feasible_members(vs);
        if (std::find(feas.begin(), feas.end(),
                      static_cast<std::size_t>(fstar_idx)) == feas.end())
          rec.f_star_retained = false;
      }
      q.clear();
    }
  }

  // Final ERM over the version space on the labels collected since the last
  // update; with no pending labels, the last update's witness stands.
  Fn h;
  try {
    if (!q.empty() || !have_witness) {
      auto cm = constrained_min_risk(vs, loss, q,
                                     have_witness ? &witness : nullptr);
      h = cm.witness;
    } else {
      h = witness;
    }
  } catch (const InfeasibleVersionSpace&) {
    rec.failed = true;
    h = have_witness ? witness
                     : (cls.kind == ClassKind::finite
                            ? cls.members.front()
                            : Fn(cls.kind == ClassKind::monotone_grid
                                     ? cls.grid
                                     : cls.dim,
                                 0.0));
  }
  rec.final_excess_error = excess_error(problem, cls, h);
  rec.final_excess_surrogate = excess_surrogate(problem, cls, h, loss);
  return {std::move(h), std::move(rec)};
}

// Passive baseline: label every draw, unconstrained ERM.
inline Algorithm1Result run_erm_passive(const Problem& problem,
                                        const FunctionClass& cls,
                                        const SurrogateLoss& loss,
                                        std::uint64_t m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  Rng stream(hash_combine(seed, 0x73747265u));
  std::vector<LabeledSample> samples;
  samples.reserve(m);
  for (std::uint64_t k = 0; k < m; ++k) {
    double x = problem.sample_x(stream);
    samples.push_back({x, problem.sample_y(stream, x)});
  }
  TrialRecord rec;
  rec.seed = seed;
  rec.labels_used = m;
  rec.unlabeled_used = m;
  Fn h = erm(cls, loss, samples);
  rec.final_excess_error = excess_error(problem, cls, h);
  rec.final_excess_surrogate = excess_surrogate(problem, cls, h, loss);
  return {std::move(h), std::move(rec)};
}

}  // namespace dbal

#endif  // DBAL_LEARNERS_HPP
