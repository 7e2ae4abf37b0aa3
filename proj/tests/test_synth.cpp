#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dbal/learners.hpp"
#include "dbal/synth.hpp"

using namespace dbal;
using Catch::Approx;

namespace {
const SurrogateLoss kQuad = make_loss(LossKind::quadratic, 1.0);
}

TEST_CASE("make_two_point") {
  Problem p = make_two_point(0.25, 0.1, 0.75, kQuad);
  CHECK(p.atom_mass[1] == Approx(0.2));  // eps0 / (2z)
  CHECK(p.atom_mass[0] == Approx(0.8));
  CHECK(p.atom_eta[1] == Approx(0.75));  // 1/2 + z
  CHECK(p.atom_fstar[0] == Approx(0.5).margin(1e-8));
  CHECK(p.atom_fstar[1] == Approx(0.5).margin(1e-8));

  SECTION("eps0 -> z limit pushes P(x1) to 1/2") {
    Problem q = make_two_point(0.25, 0.2499999, 0.75, kQuad);
    CHECK(q.atom_mass[1] == Approx(0.5).margin(1e-5));
  }
  SECTION("range violations are rejected") {
    CHECK_THROWS_AS(make_two_point(0.6, 0.1, 0.75, kQuad),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_two_point(0.25, 0.3, 0.75, kQuad),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_two_point(0.25, 0.1, 0.95, kQuad),
                    std::invalid_argument);
  }
  SECTION("sign flip at x1 costs exactly eps0 in excess error") {
    FunctionClass cls = two_point_class(p, false);
    CHECK(excess_error(p, cls, cls.members[0]) == Approx(0.1));  // g first
    CHECK(excess_error(p, cls, cls.members[1]) == Approx(0.0));
  }
}

TEST_CASE("make_threshold_tsybakov") {
  SECTION("alpha = 1 is bounded noise with margin z") {
    Problem p = make_threshold_tsybakov(0.5, 1.0, 0.3, kQuad);
    for (double x : {0.1, 0.45, 0.55, 0.9})
      CHECK(std::abs(p.eta(x) - 0.5) == Approx(0.3));
  }
  SECTION("alpha = 1/2 formula substitution") {
    Problem p = make_threshold_tsybakov(0.5, 0.5, 0.25, kQuad);
    CHECK(p.eta(0.75) == Approx(0.75));
    CHECK(p.tsybakov_alpha == 0.5);
    CHECK(p.tsybakov_a >= 1.0);
  }
  SECTION("f* for quadratic loss is 2 eta - 1 pointwise") {
    for (double alpha : {1.0, 0.5, 0.3}) {
      Problem p = make_threshold_tsybakov(0.4, alpha, 0.25, kQuad);
      for (double x : {0.1, 0.39, 0.41, 0.8})
        CHECK(p.f_star(x) == Approx(2.0 * p.eta(x) - 1.0).margin(1e-7));
    }
  }
}

TEST_CASE("make_monotone") {
  SECTION("linear eta gives f* = 2x - 1 and Bayes error 1/4") {
    Problem p = make_monotone_linear(kQuad);
    CHECK(p.f_star(0.25) == Approx(-0.5).margin(1e-9));
    CHECK(p.f_star(0.75) == Approx(0.5).margin(1e-9));
    CHECK(p.bayes_error == Approx(0.25).margin(1e-6));
  }
  SECTION("constant eta = 0.75") {
    Problem p = make_monotone([](double) { return 0.75; }, kQuad);
    CHECK(p.f_star(0.3) == Approx(0.5).margin(1e-9));
    CHECK(p.bayes_error == Approx(0.25).margin(1e-9));
  }
  SECTION("nonmonotone eta rejected") {
    CHECK_THROWS_AS(make_monotone([](double x) { return 1.0 - x; }, kQuad),
                    std::invalid_argument);
  }
}

TEST_CASE("f* is pointwise optimal against sign(eta - 1/2)") {
  Problem tp = make_two_point(0.25, 0.1, 0.75, kQuad);
  for (std::size_t i = 0; i < tp.atom_x.size(); ++i)
    CHECK(sgn(tp.atom_fstar[i]) == sgn(2.0 * tp.atom_eta[i] - 1.0));
  Problem mono = make_monotone_linear(kQuad);
  for (int i = 1; i < 100; ++i) {
    double x = i / 100.0;
    if (std::abs(mono.eta(x) - 0.5) < 1e-9) continue;
    CHECK(sgn(mono.f_star(x)) == sgn(2.0 * mono.eta(x) - 1.0));
  }
}

TEST_CASE("condition-2 fit is a valid upper bound on the classifier grid") {
  Problem p = make_threshold_tsybakov(0.5, 0.5, 0.25, kQuad);
  double a = p.tsybakov_a, alpha = p.tsybakov_alpha;
  for (int i = 0; i <= 100; ++i) {
    double t = i / 100.0;
    double lo = std::min(t, 0.5), hi = std::max(t, 0.5);
    double dist = hi - lo;
    double excess = 0.0;
    const int kSub = 512;
    for (int k = 0; k < kSub; ++k) {
      double x = lo + (hi - lo) * (k + 0.5) / kSub;
      excess += std::abs(2.0 * p.eta(x) - 1.0);
    }
    excess *= (hi - lo) / kSub;
    CHECK(dist <= a * std::pow(excess, alpha) + 1e-6);
  }
}

TEST_CASE("disagreement coefficient: two-point pair is 1") {
  Problem p = make_two_point(0.25, 0.1, 0.75, kQuad);
  FunctionClass cls = two_point_class(p, false);
  auto est = estimate_disagreement_coefficient(p, cls, kQuad, 0.1);
  CHECK(est.theta == Approx(1.0));
}

TEST_CASE("disagreement coefficient: threshold grid is about 2") {
  SurrogateLoss loss = kQuad;
  Problem p = make_discrete_threshold(100, 0.5, 0.25, loss);
  FunctionClass cls = make_threshold_grid_class(100);
  auto est = estimate_disagreement_coefficient(p, cls, loss, 0.01);
  CHECK(est.theta >= 1.8);
  CHECK(est.theta <= 2.2);
}

TEST_CASE("disagreement coefficient: monotone grid stays near 2") {
  Problem p = make_monotone_linear(kQuad);
  for (int grid : {16, 32, 64}) {
    FunctionClass cls = make_monotone_class(grid);
    auto est = estimate_disagreement_coefficient(p, cls, kQuad, 0.01);
    CHECK(est.theta >= 1.0);
    CHECK(est.theta <= 2.05);
  }
}

TEST_CASE("theta estimate always >= 1 with a coherent trace") {
  Problem p = make_two_point(0.25, 0.1, 0.75, kQuad);
  FunctionClass cls = two_point_class(p, false);
  auto est = estimate_disagreement_coefficient(p, cls, kQuad, 0.5);
  CHECK(est.theta >= 1.0);
  double sup = 0.0;
  for (const auto& pt : est.trace) {
    sup = std::max({sup, pt.ratio, 1.0});
    CHECK(pt.running_sup == Approx(sup));
  }
}

TEST_CASE("discrete sampling matches atom masses") {
  Problem p = make_two_point(0.25, 0.1, 0.75, kQuad);
  Rng rng(42);
  int hits = 0;
  const int kDraws = 20000;
  for (int k = 0; k < kDraws; ++k)
    if (p.sample_x(rng) == p.atom_x[1]) ++hits;
  CHECK(static_cast<double>(hits) / kDraws == Approx(0.2).margin(0.01));
}
