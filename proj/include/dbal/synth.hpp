#ifndef DBAL_SYNTH_HPP
#define DBAL_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dbal/classes.hpp"
#include "dbal/losses.hpp"
#include "dbal/rng.hpp"

namespace dbal {

enum class MarginalKind { discrete_atoms, uniform01 };

// A synthetic distribution with known conditional eta, optimal f_star for
// the chosen loss, and (when known) the noise-condition parameters (a, alpha)
// linking sign-distance to excess error.
struct Problem {
  MarginalKind marginal = MarginalKind::uniform01;

  // discrete
  std::vector<double> atom_x, atom_mass, atom_eta, atom_fstar;
  std::vector<double> atom_cum;  // cumulative masses for sampling

  // continuous
  std::function<double(double)> eta_fn;
  std::function<double(double)> fstar_fn;

  double tsybakov_a = 1.0;
  double tsybakov_alpha = 0.0;
  double bayes_error = 0.0;

  double eta(double x) const {
    if (marginal == MarginalKind::discrete_atoms)
      return atom_eta[atom_index(x)];
    return eta_fn(x);
  }

  double f_star(double x) const {
    if (marginal == MarginalKind::discrete_atoms)
      return atom_fstar[atom_index(x)];
    return fstar_fn(x);
  }

  std::size_t atom_index(double x) const {
    for (std::size_t i = 0; i < atom_x.size(); ++i)
      if (std::abs(atom_x[i] - x) < 1e-9) return i;
    throw std::invalid_argument("point is not an atom of the marginal");
  }

  double sample_x(Rng& rng) const {
    if (marginal == MarginalKind::uniform01) return rng.uniform();
    double u = rng.uniform();
    for (std::size_t i = 0; i < atom_cum.size(); ++i)
      if (u < atom_cum[i]) return atom_x[i];
    return atom_x.back();
  }

  int sample_y(Rng& rng, double x) const {
    return rng.bernoulli(eta(x)) ? +1 : -1;
  }
};

namespace detail {

inline void finalize_discrete(Problem& p, const SurrogateLoss& loss) {
  p.atom_cum.clear();
  double acc = 0.0, bayes = 0.0;
  p.atom_fstar.clear();
  for (std::size_t i = 0; i < p.atom_x.size(); ++i) {
    acc += p.atom_mass[i];
    p.atom_cum.push_back(acc);
    bayes += p.atom_mass[i] * std::min(p.atom_eta[i], 1.0 - p.atom_eta[i]);
    p.atom_fstar.push_back(pointwise_minimizer(loss, p.atom_eta[i]).z_star);
  }
  if (std::abs(acc - 1.0) > 1e-9)
    throw std::invalid_argument("atom masses must sum to 1");
  p.bayes_error = bayes;
}

inline std::function<double(double)> fstar_for(const SurrogateLoss& loss,
                                               std::function<double(double)>
                                                   eta) {
  if (loss.kind == LossKind::quadratic && loss.f_bar >= 1.0)
    return [eta](double x) { return 2.0 * eta(x) - 1.0; };
  return [loss, eta](double x) {
    return pointwise_minimizer(loss, eta(x)).z_star;
  };
}

}  // namespace detail

// Two-atom lower-bound construction: P({x1}) = eps0/(2z), eta(x1) = 1/2 + z.
inline Problem make_two_point(double z, double eps0, double eta_x0,
                              const SurrogateLoss& loss) {
  if (!(z > 0.0 && z < 0.5)) throw std::invalid_argument("z out of (0,1/2)");
  if (!(eps0 > 0.0 && eps0 < z))
    throw std::invalid_argument("eps0 out of (0,z)");
  if (eta_x0 < 4.0 / 6.0 - 1e-12 || eta_x0 > 5.0 / 6.0 + 1e-12)
    throw std::invalid_argument("eta_x0 out of [4/6, 5/6]");
  Problem p;
  p.marginal = MarginalKind::discrete_atoms;
  double m1 = eps0 / (2.0 * z);
  p.atom_x = {0.25, 0.75};
  p.atom_mass = {1.0 - m1, m1};
  p.atom_eta = {eta_x0, 0.5 + z};
  p.tsybakov_a = 1.0;
  p.tsybakov_alpha = 1.0;  // bounded noise: |eta - 1/2| >= min(z, eta_x0-1/2)
  detail::finalize_discrete(p, loss);
  return p;
}

// The two-member class {f*, g} of the two-point construction, where g flips
// sign only at x1. `fstar_first` controls the ERM tie-break order.
inline FunctionClass two_point_class(const Problem& p, bool fstar_first) {
  Fn fstar = {p.atom_fstar[0], p.atom_fstar[1]};
  Fn g = {p.atom_fstar[0], -p.atom_fstar[1]};
  double fb = std::max(std::abs(fstar[0]), std::abs(fstar[1]));
  std::vector<Fn> members =
      fstar_first ? std::vector<Fn>{fstar, g} : std::vector<Fn>{g, fstar};
  return make_finite_class(p.atom_x, members, fb);
}

// Numeric fit of the noise-condition constant a over threshold classifiers:
// a = sup dist(g_t, f*) / excess(g_t)^alpha, clamped to >= 1.
inline double fit_condition2_a(const Problem& p, double alpha) {
  double t_star = 0.5;
  // locate the sign crossing of f*
  for (int i = 0; i <= 4096; ++i) {
    double x = i / 4096.0;
    if (sgn(p.f_star(x)) > 0) { t_star = x; break; }
  }
  double a = 1.0;
  for (int i = 0; i <= 100; ++i) {
    double t = i / 100.0;
    double lo = std::min(t, t_star), hi = std::max(t, t_star);
    double dist = hi - lo;
    if (dist < 1e-9) continue;
    double excess = 0.0;
    const int kSub = 512;
    for (int k = 0; k < kSub; ++k) {
      double x = lo + (hi - lo) * (k + 0.5) / kSub;
      excess += std::abs(2.0 * p.eta(x) - 1.0);
    }
    excess *= (hi - lo) / kSub;
    if (excess < 1e-12) continue;
    a = std::max(a, dist / std::pow(excess, alpha));
  }
  return a;
}

// Threshold problem on [0,1] with a tunable noise exponent. alpha = 1 gives
// bounded noise with margin z; alpha < 1 gives the polynomial low-noise
// profile eta = 1/2 + (1/2) sign(x-t) min{1, |2(x-t)|}^{(1-alpha)/alpha}.
inline Problem make_threshold_tsybakov(double t, double alpha, double z,
                                       const SurrogateLoss& loss) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t out of (0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha out of (0,1]");
  if (!(z > 0.0 && z <= 0.5)) throw std::invalid_argument("z out of (0,1/2]");
  Problem p;
  p.marginal = MarginalKind::uniform01;
  if (alpha >= 1.0) {
    p.eta_fn = [t, z](double x) {
      return 0.5 + z * (x >= t ? 1.0 : -1.0);
    };
  } else {
    double e = (1.0 - alpha) / alpha;
    p.eta_fn = [t, e](double x) {
      double s = x >= t ? 1.0 : -1.0;
      return 0.5 + 0.5 * s * std::pow(std::min(1.0, std::abs(2.0 * (x - t))),
                                      e);
    };
  }
  p.fstar_fn = detail::fstar_for(loss, p.eta_fn);
  p.tsybakov_alpha = alpha;
  p.tsybakov_a = fit_condition2_a(p, alpha);
  const int kQuad = 8192;
  double bayes = 0.0;
  for (int i = 0; i < kQuad; ++i) {
    double x = (i + 0.5) / kQuad;
    bayes += std::min(p.eta_fn(x), 1.0 - p.eta_fn(x));
  }
  p.bayes_error = bayes / kQuad;
  return p;
}

// Uniform marginal with a nondecreasing eta; for the quadratic loss f* =
// 2 eta - 1 lies inside the monotone class.
inline Problem make_monotone(std::function<double(double)> eta,
                             const SurrogateLoss& loss) {
  Problem p;
  p.marginal = MarginalKind::uniform01;
  double prev = -1.0;
  for (int i = 0; i <= 512; ++i) {
    double v = eta(i / 512.0);
    if (v < prev - 1e-9)
      throw std::invalid_argument("eta must be nondecreasing");
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw std::invalid_argument("eta must map into [0,1]");
    prev = v;
  }
  p.eta_fn = eta;
  p.fstar_fn = detail::fstar_for(loss, eta);
  const int kQuad = 8192;
  double bayes = 0.0;
  for (int i = 0; i < kQuad; ++i) {
    double x = (i + 0.5) / kQuad;
    bayes += std::min(eta(x), 1.0 - eta(x));
  }
  p.bayes_error = bayes / kQuad;
  p.tsybakov_alpha = 0.5;
  p.tsybakov_a = fit_condition2_a(p, 0.5);
  return p;
}

inline Problem make_monotone_linear(const SurrogateLoss& loss) {
  return make_monotone([](double x) { return x; }, loss);
}

// Uniform mass on grid cell centers with a bounded-noise threshold at t:
// the fully-enumerable stand-in for the continuous threshold problem.
inline Problem make_discrete_threshold(int grid, double t, double z,
                                       const SurrogateLoss& loss) {
  if (grid < 2) throw std::invalid_argument("grid must be >= 2");
  Problem p;
  p.marginal = MarginalKind::discrete_atoms;
  for (int i = 0; i < grid; ++i) {
    double x = (i + 0.5) / grid;
    p.atom_x.push_back(x);
    p.atom_mass.push_back(1.0 / grid);
    p.atom_eta.push_back(0.5 + z * (x >= t ? 1.0 : -1.0));
  }
  p.tsybakov_a = 1.0;
  p.tsybakov_alpha = 1.0;
  detail::finalize_discrete(p, loss);
  return p;
}

// Finite class of sign thresholds h_j(x) = +1 iff x >= j/grid, one member
// per grid boundary j = 0..grid.
inline FunctionClass make_threshold_grid_class(int grid) {
  std::vector<double> atoms;
  for (int i = 0; i < grid; ++i) atoms.push_back((i + 0.5) / grid);
  std::vector<Fn> members;
  for (int j = 0; j <= grid; ++j) {
    Fn h(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i)
      h[i] = atoms[i] >= static_cast<double>(j) / grid ? 1.0 : -1.0;
    members.push_back(std::move(h));
  }
  return make_finite_class(std::move(atoms), std::move(members), 1.0);
}

// f* as a member of the monotone grid class (cell-center values, clamped).
inline Fn monotone_f_star(const Problem& p, const FunctionClass& cls) {
  Fn f(cls.grid);
  for (int j = 0; j < cls.grid; ++j) {
    double x = (j + 0.5) / cls.grid;
    f[j] = std::clamp(p.f_star(x), -1.0, 1.0);
  }
  return f;
}

struct ThetaPoint {
  double r = 0.0;
  double dis_mass = 0.0;
  double ratio = 0.0;
  double running_sup = 1.0;
};

struct ThetaEstimate {
  double theta = 1.0;
  double std_error = 0.0;  // nonzero only for the Monte Carlo path
  std::vector<ThetaPoint> trace;
};

// Disagreement coefficient sup_{r > r0} P(DIS(B(f*, r))) / r v 1.
inline ThetaEstimate estimate_disagreement_coefficient(
    const Problem& p, const FunctionClass& cls, const SurrogateLoss& loss,
    double r0, std::uint64_t seed = 1) {
  (void)loss;
  if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
  ThetaEstimate out;
  auto push = [&](double r, double mass) {
    double ratio = mass / r;
    out.theta = std::max({out.theta, ratio, 1.0});
    out.trace.push_back({r, mass, ratio, out.theta});
  };

  switch (cls.kind) {
    case ClassKind::finite: {
      // exact: distances to f*, balls at each distinct radius
      Fn fstar(p.atom_x.size());
      for (std::size_t i = 0; i < p.atom_x.size(); ++i)
        fstar[i] = p.atom_fstar[i];
      std::vector<double> dists;
      for (const auto& m : cls.members) {
        double d = 0.0;
        for (std::size_t i = 0; i < p.atom_x.size(); ++i)
          if (sgn(m[i]) != sgn(fstar[i])) d += p.atom_mass[i];
        dists.push_back(d);
      }
      std::vector<double> radii = {r0 * (1.0 + 1e-9)};
      for (double d : dists)
        if (d > r0) radii.push_back(d);
      std::sort(radii.begin(), radii.end());
      radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
      for (double r : radii) {
        double mass = 0.0;
        for (std::size_t i = 0; i < p.atom_x.size(); ++i) {
          bool pos = sgn(fstar[i]) > 0, neg = !pos;
          for (std::size_t k = 0; k < cls.members.size(); ++k) {
            if (dists[k] > r) continue;
            (sgn(cls.members[k][i]) > 0 ? pos : neg) = true;
          }
          if (pos && neg) mass += p.atom_mass[i];
        }
        push(r, mass);
      }
      break;
    }
    case ClassKind::monotone_grid: {
      // analytic on the grid: a ball of radius r can flip whole cells on
      // either side of the sign crossing as long as the flipped mass is <= r
      Fn fstar = monotone_f_star(p, cls);
      int cross = cls.grid;  // first nonnegative cell
      for (int j = 0; j < cls.grid; ++j)
        if (sgn(fstar[j]) > 0) { cross = j; break; }
      double w = 1.0 / cls.grid;
      std::vector<double> radii = {r0 * (1.0 + 1e-9)};
      for (int k = 1; k <= cls.grid; ++k)
        if (k * w > r0) radii.push_back(k * w);
      for (double r : radii) {
        int k = static_cast<int>(std::floor(r / w + 1e-12));
        int left = std::min(k, cross);
        int right = std::min(k, cls.grid - cross);
        push(r, (left + right) * w);
      }
      break;
    }
    case ClassKind::linear_ball: {
      // Monte Carlo over sampled ball members and a point grid
      Rng rng(seed);
      const int kMembers = 2000, kGrid = 2000;
      std::vector<Fn> sampled;
      for (int s = 0; s < kMembers; ++s) {
        Fn w(cls.dim);
        double n2 = 0.0;
        for (int j = 0; j < cls.dim; ++j) {
          // Box-Muller normal direction
          double u1 = std::max(rng.uniform(), 1e-12), u2 = rng.uniform();
          w[j] = std::sqrt(-2.0 * std::log(u1)) *
                 std::cos(2.0 * 3.14159265358979323846 * u2);
          n2 += w[j] * w[j];
        }
        double radius =
            cls.norm_bound * std::pow(rng.uniform(), 1.0 / cls.dim);
        for (double& v : w) v *= radius / std::sqrt(std::max(n2, 1e-300));
        sampled.push_back(std::move(w));
      }
      std::vector<double> dists(sampled.size(), 0.0);
      std::vector<std::vector<bool>> dis(sampled.size(),
                                         std::vector<bool>(kGrid));
      for (int g = 0; g < kGrid; ++g) {
        double x = (g + 0.5) / kGrid;
        int s_star = sgn(p.f_star(x));
        for (std::size_t k = 0; k < sampled.size(); ++k) {
          bool d = sgn(eval_fn(cls, sampled[k], x)) != s_star;
          dis[k][g] = d;
          if (d) dists[k] += 1.0 / kGrid;
        }
      }
      for (int step = 0; step <= 40; ++step) {
        double r = r0 * std::pow(1.0 / r0, step / 40.0);
        std::vector<bool> region(kGrid, false);
        for (std::size_t k = 0; k < sampled.size(); ++k) {
          if (dists[k] > r) continue;
          for (int g = 0; g < kGrid; ++g)
            if (dis[k][g]) region[g] = true;
        }
        double mass = 0.0;
        for (int g = 0; g < kGrid; ++g)
          if (region[g]) mass += 1.0 / kGrid;
        push(std::max(r, r0 * (1.0 + 1e-9)), mass);
      }
      // binomial standard error of the largest region estimate
      double pm = out.theta * r0;
      out.std_error =
          std::sqrt(std::max(pm * (1.0 - pm), 0.0) / kGrid) / r0;
      break;
    }
  }
  return out;
}

}  // namespace dbal

#endif  // DBAL_SYNTH_HPP
