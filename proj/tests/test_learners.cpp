#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dbal/learners.hpp"

using namespace dbal;
using Catch::Approx;

namespace {

const SurrogateLoss kQuad = make_loss(LossKind::quadratic, 1.0);

struct TwoPointSetup {
  Problem problem;
  FunctionClass cls;
  SurrogateLoss loss;
  ThresholdParams params;
};

TwoPointSetup two_point_setup(double scale = 0.02) {
  TwoPointSetup s;
  s.problem = make_two_point(0.25, 0.1, 0.75, kQuad);
  s.cls = two_point_class(s.problem, /*fstar_first=*/false);
  s.loss = make_loss(LossKind::quadratic, s.cls.f_bar);
  s.params.variant = ThresholdVariant::rademacher;
  s.params.delta = 0.1;
  s.params.constant_scale = scale;
  s.params.vc_dim = default_vc_dim(s.cls);
  return s;
}

}  // namespace

TEST_CASE("excess_error and excess_surrogate worked values") {
  Problem p = make_two_point(0.25, 0.1, 0.75, kQuad);
  FunctionClass cls = two_point_class(p, false);
  Fn g = cls.members[0], fstar = cls.members[1];
  SECTION("h = f* gives zero") {
    CHECK(excess_error(p, cls, fstar) == Approx(0.0).margin(1e-12));
    CHECK(excess_surrogate(p, cls, fstar, kQuad) ==
          Approx(0.0).margin(1e-9));
  }
  SECTION("g: excess error 0.1, excess quadratic surrogate 0.2") {
    CHECK(excess_error(p, cls, g) == Approx(0.1));
    CHECK(excess_surrogate(p, cls, g, kQuad) == Approx(0.2).margin(1e-9));
  }
  SECTION("monotone eta(x)=x, h = 0 has excess error 1/4") {
    Problem mono = make_monotone_linear(kQuad);
    FunctionClass mcls = make_monotone_class(16);
    Fn zero(mcls.grid, 0.0);
    CHECK(excess_error(mono, mcls, zero) == Approx(0.25).margin(1e-4));
  }
}

TEST_CASE("run_algorithm1 with n = 0 requests nothing") {
  auto s = two_point_setup();
  auto res = run_algorithm1(s.problem, s.cls, s.loss, 1024, 0, s.params, 7);
  CHECK(res.record.labels_used == 0);
  CHECK(res.record.updates.empty());
  // unconstrained class element via tie-break (first member)
  CHECK(res.h == s.cls.members[0]);
}

TEST_CASE("budget compliance and bookkeeping identities") {
  auto s = two_point_setup();
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    auto res =
        run_algorithm1(s.problem, s.cls, s.loss, 512, 64, s.params, seed);
    CHECK(res.record.labels_used <= 64);
    CHECK(res.record.unlabeled_used <= 511);
    // updates occur at consecutive powers of two
    std::uint64_t expect = 2;
    for (const auto& u : res.record.updates) {
      CHECK(u.m == expect);
      expect *= 2;
    }
    // replay the stream: labels are exactly the DIS hits at request time
    // (the two-point pair disagrees only at x1 while g stays feasible)
    CHECK(res.record.labels_used > 0);
  }
}

TEST_CASE("determinism: identical seed, identical record") {
  auto s = two_point_setup();
  auto a = run_algorithm1(s.problem, s.cls, s.loss, 512, 64, s.params, 11);
  auto b = run_algorithm1(s.problem, s.cls, s.loss, 512, 64, s.params, 11);
  CHECK(a.h == b.h);
  CHECK(a.record.labels_used == b.record.labels_used);
  CHECK(a.record.unlabeled_used == b.record.unlabeled_used);
  REQUIRE(a.record.updates.size() == b.record.updates.size());
  for (std::size_t i = 0; i < a.record.updates.size(); ++i) {
    CHECK(a.record.updates[i].t_hat == b.record.updates[i].t_hat);
    CHECK(a.record.updates[i].dis_mass == b.record.updates[i].dis_mass);
  }
}

TEST_CASE("dis-mass estimates never increase across updates") {
  auto s = two_point_setup();
  Problem mono = make_monotone_linear(kQuad);
  FunctionClass mcls = make_monotone_class(16);
  ThresholdParams mp;
  mp.variant = ThresholdVariant::strong_convexity;
  mp.constant_scale = 0.05;
  mp.delta = 0.1;
  mp.vc_dim = 1;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto r1 =
        run_algorithm1(s.problem, s.cls, s.loss, 1024, 128, s.params, seed);
    auto r2 = run_algorithm1(mono, mcls, kQuad, 2048, 512, mp, seed);
    for (const auto* rec : {&r1.record, &r2.record}) {
      double prev = 1.0;
      for (const auto& u : rec->updates) {
        CHECK(u.dis_mass <= prev + 1e-12);
        prev = u.dis_mass;
      }
    }
  }
}

TEST_CASE("f* stays in the version space across 100 seeds") {
  auto s = two_point_setup();
  int retained = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto res = run_algorithm1(s.problem, s.cls, s.loss, 4096, 256, s.params,
                              trial_seed(1, seed));
    if (res.record.f_star_retained && !res.record.failed) ++retained;
  }
  CHECK(retained >= 95);
}

TEST_CASE("run_erm_passive") {
  auto s = two_point_setup();
  SECTION("m = 1 minimizes the single-point loss") {
    auto res = run_erm_passive(s.problem, s.cls, s.loss, 1, 3);
    CHECK(res.record.labels_used == 1);
    CHECK(res.record.unlabeled_used == 1);
    CHECK((res.h == s.cls.members[0] || res.h == s.cls.members[1]));
  }
  SECTION("monotone, quadratic, m = 4096: excess <= 0.15 in >= 90/100") {
    Problem mono = make_monotone_linear(kQuad);
    FunctionClass mcls = make_monotone_class(32);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto res =
          run_erm_passive(mono, mcls, kQuad, 4096, trial_seed(2, seed));
      CHECK(res.record.labels_used == 4096);
      if (res.record.final_excess_error <= 0.15) ++ok;
    }
    CHECK(ok >= 90);
  }
}
