#ifndef DBAL_LOSSES_HPP
#define DBAL_LOSSES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dbal {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Log(x) = max{ln x, 1}; arguments at or below e clamp to 1.
inline double log_floor(double x) {
  return x > 2.718281828459045 ? std::log(x) : 1.0;
}

enum class LossKind {
  exponential,
  hinge,
  quadratic,
  truncated_quadratic,
  zero_one,
};

inline const char* loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::exponential: return "exponential";
    case LossKind::hinge: return "hinge";
    case LossKind::quadratic: return "quadratic";
    case LossKind::truncated_quadratic: return "truncated_quadratic";
    case LossKind::zero_one: return "zero_one";
  }
  return "?";
}

inline LossKind loss_kind_from_name(const std::string& s) {
  if (s == "exponential") return LossKind::exponential;
  if (s == "hinge") return LossKind::hinge;
  if (s == "quadratic") return LossKind::quadratic;
  if (s == "truncated_quadratic") return LossKind::truncated_quadratic;
  if (s == "zero_one") return LossKind::zero_one;
  throw std::invalid_argument("unknown loss kind: " + s);
}

// A surrogate loss together with the constants of its smoothness/convexity
// record: uniform class bound f_bar, loss bound, Lipschitz constant L,
// modulus-of-convexity constants (c, r), and the pseudometric bound d_bar.
struct SurrogateLoss {
  LossKind kind = LossKind::quadratic;
  double f_bar = 1.0;
  double loss_bound = 1.0;    // 1 v sup loss over the class
  double lipschitz_L = 1.0;
  double convexity_c = 0.0;
  double convexity_r = kInf;  // infinity for hinge and zero-one
  double metric_bound = 1.0;
  bool has_condition1 = false;

  bool has_closed_form_psi() const { return true; }

  double closed_form_psi(double x) const {
    switch (kind) {
      case LossKind::exponential:
        return 1.0 - std::sqrt(std::max(0.0, 1.0 - x * x));
      case LossKind::hinge: return std::abs(x);
      case LossKind::quadratic: return x * x;
      case LossKind::truncated_quadratic: return x * x;
      case LossKind::zero_one: return std::abs(x);
    }
    return 0.0;
  }
};

inline SurrogateLoss make_loss(LossKind kind, double f_bar) {
  if (!(f_bar > 0)) throw std::invalid_argument("f_bar must be positive");
  SurrogateLoss l;
  l.kind = kind;
  l.f_bar = f_bar;
  switch (kind) {
    case LossKind::exponential:
      l.loss_bound = std::max(1.0, std::exp(f_bar));
      l.lipschitz_L = std::exp(f_bar);
      l.convexity_c = std::exp(-f_bar) / 8.0;
      l.convexity_r = 2.0;
      l.metric_bound = 2.0 * f_bar;
      l.has_condition1 = true;
      break;
    case LossKind::hinge:
      l.loss_bound = std::max(1.0, 1.0 + f_bar);
      l.lipschitz_L = 1.0;
      l.convexity_c = 1.0;  // vacuous: r = infinity makes b = L^2
      l.convexity_r = kInf;
      l.metric_bound = 2.0 * f_bar;
      l.has_condition1 = true;
      break;
    case LossKind::quadratic:
      l.loss_bound = std::max(1.0, (1.0 + f_bar) * (1.0 + f_bar));
      l.lipschitz_L = 2.0 * (f_bar + 1.0);
      l.convexity_c = 0.25;
      l.convexity_r = 2.0;
      l.metric_bound = 2.0 * f_bar;
      l.has_condition1 = true;
      break;
    case LossKind::truncated_quadratic: {
      double m = std::max(1.0, 1.0 + f_bar);
      l.loss_bound = std::max(1.0, m * m);
      l.lipschitz_L = 2.0 * (f_bar + 1.0);
      l.convexity_c = 0.25;
      l.convexity_r = 2.0;
      // pseudometric |min{a,1} - min{b,1}| has range f_bar + 1 on [-f_bar, f_bar]
      l.metric_bound = f_bar + 1.0;
      l.has_condition1 = true;
      break;
    }
    case LossKind::zero_one:
      l.loss_bound = 1.0;
      l.lipschitz_L = 1.0;
      l.convexity_c = 0.0;
      l.convexity_r = kInf;
      l.metric_bound = 1.0;
      l.has_condition1 = false;
      break;
  }
  return l;
}

inline double eval_loss(const SurrogateLoss& loss, double z) {
  switch (loss.kind) {
    case LossKind::exponential:
      if (z == kInf) return 0.0;
      if (z == -kInf) return kInf;
      return std::exp(-z);
    case LossKind::hinge:
      if (z == kInf) return 0.0;
      return std::max(1.0 - z, 0.0);
    case LossKind::quadratic: {
      if (z == kInf || z == -kInf) return kInf;
      double d = 1.0 - z;
      return d * d;
    }
    case LossKind::truncated_quadratic: {
      if (z == kInf) return 0.0;
      if (z == -kInf) return kInf;
      double d = std::max(1.0 - z, 0.0);
      return d * d;
    }
    case LossKind::zero_one:
      return z <= 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

// d/dz loss(z); subgradient at hinge kinks. Not defined for zero_one.
inline double eval_loss_derivative(const SurrogateLoss& loss, double z) {
  switch (loss.kind) {
    case LossKind::exponential: return -std::exp(-z);
    case LossKind::hinge: return z < 1.0 ? -1.0 : 0.0;
    case LossKind::quadratic: return -2.0 * (1.0 - z);
    case LossKind::truncated_quadratic:
      return -2.0 * std::max(1.0 - z, 0.0);
    case LossKind::zero_one:
      throw std::invalid_argument("zero_one loss has no derivative");
  }
  return 0.0;
}

inline bool is_convex_loss(LossKind k) { return k != LossKind::zero_one; }

inline double conditional_risk(const SurrogateLoss& loss, double eta0,
                               double z) {
  double a = eval_loss(loss, z);
  double b = eval_loss(loss, -z);
  // avoid 0 * inf
  double r = 0.0;
  if (eta0 > 0.0) r += eta0 * a;
  if (eta0 < 1.0) r += (1.0 - eta0) * b;
  return r;
}

struct PointwiseMin {
  double z_star = 0.0;
  double l_star = 0.0;
};

namespace detail {

// Minimize the (unimodal) conditional risk over [lo, hi]: 1025-point coarse
// scan, then golden-section refinement to |z| tolerance 1e-10.
inline PointwiseMin minimize_conditional(const SurrogateLoss& loss,
                                         double eta0, double lo, double hi) {
  if (loss.kind == LossKind::quadratic) {
    // exact: the conditional risk is a parabola with vertex at 2 eta0 - 1
    double z = std::clamp(2.0 * eta0 - 1.0, lo, hi);
    return {z, conditional_risk(loss, eta0, z)};
  }
  if (loss.kind == LossKind::zero_one) {
    // discontinuous: the minimum depends only on the sign of z
    std::vector<double> cand;
    if (lo < 0.0) cand.push_back(lo / 2.0);
    if (lo <= 0.0 && 0.0 <= hi) cand.push_back(0.0);
    if (hi > 0.0) cand.push_back(hi / 2.0);
    PointwiseMin best{cand.front(),
                      conditional_risk(loss, eta0, cand.front())};
    for (double z : cand) {
      double v = conditional_risk(loss, eta0, z);
      if (v < best.l_star - 1e-15) best = {z, v};
    }
    return best;
  }
  const int kGrid = 1024;
  double best_z = lo, best_v = kInf;
  for (int i = 0; i <= kGrid; ++i) {
    double z = lo + (hi - lo) * i / kGrid;
    double v = conditional_risk(loss, eta0, z);
    if (v < best_v - 1e-15 ||
        (v < best_v + 1e-15 && std::abs(z) < std::abs(best_z))) {
      best_v = v;
      best_z = z;
    }
  }
  double step = (hi - lo) / kGrid;
  double a = std::max(lo, best_z - step), b = std::min(hi, best_z + step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = conditional_risk(loss, eta0, c);
  double fd = conditional_risk(loss, eta0, d);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = conditional_risk(loss, eta0, c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = conditional_risk(loss, eta0, d);
    }
  }
  double z = 0.5 * (a + b);
  double v = conditional_risk(loss, eta0, z);
  if (best_v < v) { z = best_z; v = best_v; }
  // prefer z = 0 on exact ties (flat regions, eta0 = 1/2)
  if (lo <= 0.0 && 0.0 <= hi) {
    double v0 = conditional_risk(loss, eta0, 0.0);
    if (v0 <= v + 1e-12) { z = 0.0; v = v0; }
  }
  return {z, v};
}

}  // namespace detail

// Minimizer of the conditional risk over the clamped range [-f_bar, f_bar].
inline PointwiseMin pointwise_minimizer(const SurrogateLoss& loss,
                                        double eta0) {
  if (eta0 < 0.0 || eta0 > 1.0)
    throw std::invalid_argument("eta0 out of [0,1]");
  return detail::minimize_conditional(loss, eta0, -loss.f_bar, loss.f_bar);
}

// Infimum of the conditional risk subject to z(2 eta0 - 1) <= 0.
inline double constrained_minimizer(const SurrogateLoss& loss, double eta0) {
  if (eta0 < 0.0 || eta0 > 1.0)
    throw std::invalid_argument("eta0 out of [0,1]");
  double lo = -loss.f_bar, hi = loss.f_bar;
  if (eta0 > 0.5) hi = 0.0;
  if (eta0 < 0.5) lo = 0.0;
  return detail::minimize_conditional(loss, eta0, lo, hi).l_star;
}

inline double psi_tilde(const SurrogateLoss& loss, double zeta) {
  if (zeta < -1.0 || zeta > 1.0)
    throw std::invalid_argument("zeta out of [-1,1]");
  double eta0 = (1.0 + zeta) / 2.0;
  double v = constrained_minimizer(loss, eta0) -
             pointwise_minimizer(loss, eta0).l_star;
  return std::max(v, 0.0);
}

// Grid of psi_tilde on [0,1] plus its lower convex envelope (monotone-chain
// lower hull of the grid points, linear interpolation between vertices).
class CalibrationTable {
 public:
  explicit CalibrationTable(const SurrogateLoss& loss, int resolution = 1024)
      : loss_(loss), n_(resolution) {
    if (resolution < 2) throw std::invalid_argument("resolution < 2");
    xs_.reserve(n_ + 1);
    tilde_.reserve(n_ + 1);
    for (int i = 0; i <= n_; ++i) {
      double x = static_cast<double>(i) / n_;
      xs_.push_back(x);
      tilde_.push_back(psi_tilde(loss, x));
    }
    build_hull();
    validate();
  }

  const SurrogateLoss& loss() const { return loss_; }
  int resolution() const { return n_; }
  const std::vector<double>& grid() const { return xs_; }
  const std::vector<double>& psi_tilde_values() const { return tilde_; }

  double psi_tilde_at(double x) const {  // linear interpolation of the grid
    return interp(xs_, tilde_, x);
  }

  // Envelope evaluation (always available).
  double psi_envelope(double x) const {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("x out of [0,1]");
    return interp(hull_x_, hull_y_, x);
  }

  // Closed form when it agrees with the envelope on the grid; the envelope
  // otherwise (e.g. when the clamp at f_bar distorts psi_tilde).
  double psi(double x) const {
    if (closed_form_ok_) return loss_.closed_form_psi(x);
    return psi_envelope(x);
  }

  bool closed_form_in_use() const { return closed_form_ok_; }

 private:
  void build_hull() {
    // monotone chain over (x_i, tilde_i), keeping the lower hull
    for (int i = 0; i <= n_; ++i) {
      while (hull_x_.size() >= 2) {
        size_t k = hull_x_.size();
        double cross = (hull_x_[k - 1] - hull_x_[k - 2]) *
                           (tilde_[i] - hull_y_[k - 2]) -
                       (xs_[i] - hull_x_[k - 2]) *
                           (hull_y_[k - 1] - hull_y_[k - 2]);
        if (cross >= 0.0) break;
        hull_x_.pop_back();
        hull_y_.pop_back();
      }
      hull_x_.push_back(xs_[i]);
      hull_y_.push_back(tilde_[i]);
    }
  }

  void validate() {
    double worst = 0.0, worst_cf = 0.0;
    for (int i = 0; i <= n_; ++i) {
      double env = psi_envelope(xs_[i]);
      worst = std::max(worst, env - tilde_[i]);
      worst_cf = std::max(worst_cf,
                          std::abs(env - loss_.closed_form_psi(xs_[i])));
    }
    if (worst > 1e-9)
      throw std::runtime_error("calibration grid validation failed: envelope "
                               "exceeds psi_tilde by " + std::to_string(worst));
    closed_form_ok_ = worst_cf <= 5e-4;
  }

  static double interp(const std::vector<double>& xs,
                       const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    size_t j = static_cast<size_t>(it - xs.begin());
    double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + t * (ys[j] - ys[j - 1]);
  }

  SurrogateLoss loss_;
  int n_;
  std::vector<double> xs_, tilde_;
  std::vector<double> hull_x_, hull_y_;
  bool closed_form_ok_ = false;
};

struct Lemma3Params {
  double b = 0.0;
  double beta = 0.0;
};

// beta = min{1, 2/r}, b = (2 c d_bar^{min{r-2,0}})^{-beta} L^2.
inline Lemma3Params lemma3_params(const SurrogateLoss& loss) {
  if (!loss.has_condition1)
    throw std::invalid_argument("loss does not carry convexity constants");
  double beta = std::isinf(loss.convexity_r)
                    ? 0.0
                    : std::min(1.0, 2.0 / loss.convexity_r);
  double dexp = std::isinf(loss.convexity_r)
                    ? 0.0
                    : std::min(loss.convexity_r - 2.0, 0.0);
  double base = 2.0 * loss.convexity_c * std::pow(loss.metric_bound, dexp);
  double b = std::pow(base, -beta) * loss.lipschitz_L * loss.lipschitz_L;
  return {b, beta};
}

// Psi(eps) = a eps^alpha psi(eps^{1-alpha} / (2a)).
inline double capital_psi(const CalibrationTable& table, double eps, double a,
                          double alpha) {
  if (!(a >= 1.0)) throw std::invalid_argument("a must be >= 1");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("alpha out of [0,1]");
  if (!(eps > 0.0 && eps < 1.0 + 1e-12))
    throw std::invalid_argument("eps out of (0,1]");
  return a * std::pow(eps, alpha) *
         table.psi(std::pow(eps, 1.0 - alpha) / (2.0 * a));
}

// Psi^{-1}(gamma) = inf{eps > 0 : gamma <= Psi(eps)}, capped at 1.
inline double capital_psi_inverse(const CalibrationTable& table, double gamma,
                                  double a, double alpha) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (gamma > capital_psi(table, 1.0, a, alpha)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    if (gamma <= capital_psi(table, mid, a, alpha))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace dbal

#endif  // DBAL_LOSSES_HPP
