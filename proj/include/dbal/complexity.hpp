#ifndef DBAL_COMPLEXITY_HPP
#define DBAL_COMPLEXITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dbal/batch.hpp"
#include "dbal/classes.hpp"
#include "dbal/losses.hpp"

namespace dbal {

// Empirical Rademacher-style deviation over a finite set of functions:
// sup_{h,g} (1/q) sum_k xi_k (loss(h) - loss(g))
//   = max_h A(h) - min_g A(g),  A(h) = (1/q) sum_k xi_k loss(h(x_k) y_k).
inline double phi_hat(const FunctionClass& cls, const std::vector<Fn>& members,
                      const LabeledBatch& batch, const SurrogateLoss& loss) {
  if (batch.empty() || members.empty()) return 0.0;
  double amax = -kInf, amin = kInf;
  for (const auto& h : members) {
    double a = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k)
      a += batch.xi(k) *
           eval_loss(loss, eval_fn(cls, h, batch.xs[k]) * batch.ys[k]);
    a /= static_cast<double>(batch.size());
    amax = std::max(amax, a);
    amin = std::min(amin, a);
  }
  return amax - amin;
}

// Empirical diameter: sup_{h,g} sqrt((1/q) sum_k (loss(h) - loss(g))^2).
inline double d_hat(const FunctionClass& cls, const std::vector<Fn>& members,
                    const LabeledBatch& batch, const SurrogateLoss& loss) {
  if (batch.empty() || members.size() < 2) return 0.0;
  std::vector<std::vector<double>> lv(members.size(),
                                      std::vector<double>(batch.size()));
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t k = 0; k < batch.size(); ++k)
      lv[i][k] = eval_loss(
          loss, eval_fn(cls, members[i], batch.xs[k]) * batch.ys[k]);
  double best = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        double d = lv[i][k] - lv[j][k];
        s += d * d;
      }
      best = std::max(best, s / static_cast<double>(batch.size()));
    }
  return std::sqrt(best);
}

// Data-dependent deviation bound
//   U = 12 phi + 34 D sqrt(s/q) + 752 lbar s / q,
// with the convention q = 0 -> U = 752 lbar s. `scale` multiplies the whole
// bound (the constants are conservative by design).
inline double u_hat(const FunctionClass& cls, const std::vector<Fn>& members,
                    const LabeledBatch& batch, const SurrogateLoss& loss,
                    double s, double scale = 1.0) {
  if (!(s >= 0.0)) throw std::invalid_argument("s must be nonnegative");
  double lbar = loss.loss_bound;
  if (batch.empty()) return scale * 752.0 * lbar * s;
  double q = static_cast<double>(batch.size());
  return scale * (12.0 * phi_hat(cls, members, batch, loss) +
                  34.0 * d_hat(cls, members, batch, loss) * std::sqrt(s / q) +
                  752.0 * lbar * s / q);
}

// s(m) = max{ln(12 log2(2m)^2 / delta), 1}.
inline double s_hat_default(std::uint64_t m, double delta) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta out of (0,1)");
  double l2 = std::log2(2.0 * static_cast<double>(m));
  return std::max(std::log(12.0 * l2 * l2 / delta), 1.0);
}

enum class ThresholdVariant { rademacher, recursive_vc, strong_convexity };

inline const char* threshold_variant_name(ThresholdVariant v) {
  switch (v) {
    case ThresholdVariant::rademacher: return "rademacher";
    case ThresholdVariant::recursive_vc: return "recursive_vc";
    case ThresholdVariant::strong_convexity: return "strong_convexity";
  }
  return "?";
}

inline ThresholdVariant threshold_variant_from_name(const std::string& s) {
  if (s == "rademacher") return ThresholdVariant::rademacher;
  if (s == "recursive_vc") return ThresholdVariant::recursive_vc;
  if (s == "strong_convexity") return ThresholdVariant::strong_convexity;
  throw std::invalid_argument("unknown threshold variant: " + s);
}

struct ThresholdParams {
  ThresholdVariant variant = ThresholdVariant::rademacher;
  double c0 = 1.0;
  int vc_dim = 1;
  double constant_scale = 1.0;
  double delta = 0.1;
};

// Update-radius threshold from the data-dependent bound over the current
// (finite) version space. constant_scale = 0 collapses the threshold to 0.
inline double t_hat_rademacher(const VersionSpace& vs,
                               const SurrogateLoss& loss,
                               const LabeledBatch& batch, std::uint64_t m,
                               const ThresholdParams& params) {
  auto members = version_space_members(vs);
  double s = s_hat_default(m, params.delta);
  return u_hat(*vs.cls, members, batch, loss, s, params.constant_scale);
}

// Carries (m, |Q_m|, T_m ^ lbar) from one doubling epoch to the next for the
// recursive variance proxy gamma_m = (8 (|Q_{m/2}| v 1) / m)(T_{m/2} ^ lbar).
struct RecursionState {
  std::uint64_t last_m = 0;
  double last_q = 0.0;
  double last_capped_t = 0.0;
};

inline double t_hat_recursive_vc(RecursionState& state, std::uint64_t q_m,
                                 std::uint64_t m, const SurrogateLoss& loss,
                                 const ThresholdParams& params) {
  if (m < 2 || (m & (m - 1)) != 0)
    throw std::invalid_argument("m must be a power of two >= 2");
  if (state.last_m == 0) {
    if (m != 2)
      throw std::invalid_argument("recursion must start at m = 2");
  } else if (m != 2 * state.last_m) {
    throw std::invalid_argument("epochs must double: expected m = 2 last_m");
  }
  auto [b, beta] = lemma3_params(loss);
  double lbar = loss.loss_bound;
  double gamma = (m == 2)
                     ? lbar
                     : (8.0 * std::max(state.last_q, 1.0) /
                        static_cast<double>(m)) *
                           state.last_capped_t;
  double q = std::max(static_cast<double>(q_m), 1.0);
  double s = s_hat_default(m, params.delta);
  double vc = static_cast<double>(params.vc_dim);
  double md = static_cast<double>(m);
  double gb = std::pow(gamma, beta);
  double logarg = lbar * (static_cast<double>(q_m) + s) / (md * b * gb);
  double cap = vc * log_floor(logarg) + s;
  double t = params.c0 * params.constant_scale * (md / 2.0) / q *
             (std::sqrt(gb * (b / md) * cap) + (lbar / md) * cap);
  state.last_m = m;
  state.last_q = static_cast<double>(q_m);
  state.last_capped_t = std::min(t, lbar);
  return t;
}

// Closed-form threshold under the strong-convexity transfer: the larger of a
// fast-rate and a slow-rate term, capped at lbar.
inline double t_hat_strong_convexity(std::uint64_t q_m, std::uint64_t m,
                                     const SurrogateLoss& loss,
                                     const ThresholdParams& params) {
  (void)m;
  auto [b, beta] = lemma3_params(loss);
  double lbar = loss.loss_bound;
  double q = std::max(static_cast<double>(q_m), 1.0);
  double qd = static_cast<double>(q_m);
  double s = s_hat_default(std::max<std::uint64_t>(m, 1), params.delta);
  double vc = static_cast<double>(params.vc_dim);
  double arg1 = (lbar * lbar / b) *
                std::pow(qd / (b * vc), beta / (2.0 - beta));
  double t1 = std::pow((b / q) * (vc * log_floor(arg1) + s), 1.0 / (2.0 - beta));
  double arg2 = (lbar * lbar / b) * std::pow(qd / (lbar * vc), beta);
  double t2 = (lbar / q) * (vc * log_floor(arg2) + s);
  return std::min(lbar, params.c0 * params.constant_scale * std::max(t1, t2));
}

}  // namespace dbal

#endif  // DBAL_COMPLEXITY_HPP
