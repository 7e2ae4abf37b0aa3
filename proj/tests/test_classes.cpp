#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dbal/classes.hpp"
#include "dbal/oracle.hpp"
#include "dbal/rng.hpp"
#include "dbal/synth.hpp"

using namespace dbal;
using Catch::Approx;

namespace {

const SurrogateLoss kQuad = make_loss(LossKind::quadratic, 1.0);

FunctionClass random_finite_class(Rng& rng, std::size_t n_atoms,
                                  std::size_t n_members) {
  std::vector<double> atoms;
  for (std::size_t i = 0; i < n_atoms; ++i)
    atoms.push_back((i + 0.5) / n_atoms);
  std::vector<Fn> members;
  for (std::size_t k = 0; k < n_members; ++k) {
    Fn f(n_atoms);
    for (auto& v : f) v = 2.0 * rng.uniform() - 1.0;
    members.push_back(std::move(f));
  }
  return make_finite_class(std::move(atoms), std::move(members), 1.0);
}

LabeledBatch random_batch(Rng& rng, const FunctionClass& cls, std::size_t q) {
  LabeledBatch b;
  b.bits_seed = rng.next_u64();
  for (std::size_t k = 0; k < q; ++k)
    b.append(k + 1, cls.atoms[rng.below(cls.atoms.size())], rng.sign());
  return b;
}

}  // namespace

TEST_CASE("monotone erm with quadratic loss") {
  FunctionClass cls = make_monotone_class(10);
  SECTION("already monotone targets are matched exactly") {
    Fn f = erm(cls, kQuad, {{0.2, -1}, {0.8, +1}});
    CHECK(eval_fn(cls, f, 0.2) == Approx(-1.0));
    CHECK(eval_fn(cls, f, 0.8) == Approx(1.0));
  }
  SECTION("violating pair is pooled to zero") {
    Fn f = erm(cls, kQuad, {{0.2, +1}, {0.8, -1}});
    CHECK(eval_fn(cls, f, 0.2) == Approx(0.0).margin(1e-12));
    CHECK(eval_fn(cls, f, 0.8) == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("monotone erm output is nondecreasing and within [-1,1]") {
  Rng rng(7);
  FunctionClass cls = make_monotone_class(16);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<LabeledSample> samples;
    std::size_t q = 1 + rng.below(12);
    for (std::size_t k = 0; k < q; ++k)
      samples.push_back({rng.uniform(), rng.sign()});
    Fn f = erm(cls, kQuad, samples);
    for (int j = 0; j < cls.grid; ++j) {
      CHECK(f[j] >= -1.0 - 1e-12);
      CHECK(f[j] <= 1.0 + 1e-12);
      if (j > 0) CHECK(f[j] >= f[j - 1] - 1e-12);
    }
  }
}

TEST_CASE("finite erm ties break to the first listed member") {
  // symmetric members with equal empirical risk on a symmetric sample
  FunctionClass cls = make_finite_class(
      {0.25, 0.75}, {Fn{0.5, -0.5}, Fn{-0.5, 0.5}}, 0.5);
  Fn h = erm(cls, kQuad, {{0.25, +1}, {0.75, +1}});
  CHECK(h == cls.members[0]);
}

TEST_CASE("erm rejects empty samples") {
  FunctionClass cls = make_monotone_class(4);
  CHECK_THROWS_AS(erm(cls, kQuad, {}), std::invalid_argument);
}

TEST_CASE("constrained_min_risk without constraints equals erm") {
  Rng rng(11);
  FunctionClass cls = random_finite_class(rng, 4, 6);
  VersionSpace vs = make_version_space(cls);
  LabeledBatch obj = random_batch(rng, cls, 8);
  auto cm = constrained_min_risk(vs, kQuad, obj);
  Fn h = erm(cls, kQuad, to_samples(obj));
  CHECK(cm.value == Approx(empirical_risk(cls, kQuad, h, to_samples(obj))));
}

TEST_CASE("finite constraint excludes the unconstrained minimizer") {
  // two functions on one atom; constraint batch makes member 0 infeasible
  FunctionClass cls = make_finite_class({0.5}, {Fn{1.0}, Fn{-1.0}}, 1.0);
  VersionSpace vs = make_version_space(cls);
  LabeledBatch cb;
  cb.append(1, 0.5, -1);  // member 0 risk 4, member 1 risk 0
  vs = with_constraint(vs, kQuad, cb, 1.0);
  LabeledBatch obj;
  obj.append(2, 0.5, +1);  // member 0 would win unconstrained
  auto cm = constrained_min_risk(vs, kQuad, obj);
  CHECK(cm.witness == cls.members[1]);
  CHECK(cm.value == Approx(4.0));
}

TEST_CASE("empty objective returns value zero with a feasible witness") {
  Rng rng(13);
  FunctionClass cls = random_finite_class(rng, 3, 5);
  VersionSpace vs = make_version_space(cls);
  LabeledBatch cb = random_batch(rng, cls, 6);
  double minr = kInf;
  for (const auto& m : cls.members)
    minr = std::min(minr, empirical_risk(cls, kQuad, m, to_samples(cb)));
  vs = with_constraint(vs, kQuad, cb, minr + 0.05);
  LabeledBatch empty;
  auto cm = constrained_min_risk(vs, kQuad, empty);
  CHECK(cm.value == 0.0);
  CHECK(empirical_risk(cls, kQuad, cm.witness, to_samples(cb)) <=
        minr + 0.05 + kFeasTol);
}

TEST_CASE("infeasible finite version space is flagged") {
  FunctionClass cls = make_finite_class({0.5}, {Fn{1.0}, Fn{-1.0}}, 1.0);
  VersionSpace vs = make_version_space(cls);
  LabeledBatch cb;
  cb.append(1, 0.5, +1);
  vs = with_constraint(vs, kQuad, cb, -1.0);  // below every member's risk
  CHECK(feasible_members(vs).empty());
  LabeledBatch empty;
  CHECK_THROWS_AS(constrained_min_risk(vs, kQuad, empty),
                  InfeasibleVersionSpace);
}

TEST_CASE("version_space_members: full list without constraints") {
  Rng rng(17);
  FunctionClass cls = random_finite_class(rng, 3, 7);
  VersionSpace vs = make_version_space(cls);
  CHECK(version_space_members(vs).size() == 7);
  FunctionClass mono = make_monotone_class(4);
  VersionSpace mvs = make_version_space(mono);
  CHECK_THROWS_AS(version_space_members(mvs), UnsupportedClassKind);
}

TEST_CASE("appending a constraint never enlarges the feasible set") {
  Rng rng(19);
  for (int rep = 0; rep < 30; ++rep) {
    FunctionClass cls = random_finite_class(rng, 4, 8);
    VersionSpace vs = make_version_space(cls);
    LabeledBatch b1 = random_batch(rng, cls, 5);
    double m1 = kInf;
    for (const auto& m : cls.members)
      m1 = std::min(m1, empirical_risk(cls, kQuad, m, to_samples(b1)));
    vs = with_constraint(vs, kQuad, b1, m1 + rng.uniform());
    auto before = feasible_members(vs);
    LabeledBatch b2 = random_batch(rng, cls, 5);
    double m2 = kInf;
    for (std::size_t i : before)
      m2 = std::min(m2, empirical_risk(cls, kQuad, cls.members[i],
                                       to_samples(b2)));
    vs = with_constraint(vs, kQuad, b2, m2 + rng.uniform());
    auto after = feasible_members(vs);
    for (std::size_t i : after)
      CHECK(std::find(before.begin(), before.end(), i) != before.end());
    CHECK(!after.empty());
  }
}

TEST_CASE("constrained minimum is <= every feasible member's risk") {
  Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    FunctionClass cls = random_finite_class(rng, 4, 6);
    VersionSpace vs = make_version_space(cls);
    LabeledBatch cb = random_batch(rng, cls, 6);
    double minr = kInf;
    for (const auto& m : cls.members)
      minr = std::min(minr, empirical_risk(cls, kQuad, m, to_samples(cb)));
    vs = with_constraint(vs, kQuad, cb, minr + rng.uniform());
    LabeledBatch obj = random_batch(rng, cls, 4);
    auto cm = constrained_min_risk(vs, kQuad, obj);
    for (std::size_t i : feasible_members(vs))
      CHECK(cm.value <= empirical_risk(cls, kQuad, cls.members[i],
                                       to_samples(obj)) +
                            1e-12);
  }
}

TEST_CASE("dis_contains basics") {
  SECTION("unconstrained monotone class disagrees everywhere inside (0,1)") {
    FunctionClass cls = make_monotone_class(8);
    VersionSpace vs = make_version_space(cls);
    CHECK(dis_contains(vs, kQuad, 0.3));
    CHECK(dis_contains(vs, kQuad, 0.9));
  }
  SECTION("two-point pair disagrees only at x1") {
    Problem p = make_two_point(0.25, 0.1, 0.75, kQuad);
    FunctionClass cls = two_point_class(p, false);
    VersionSpace vs = make_version_space(cls);
    CHECK_FALSE(dis_contains(vs, kQuad, p.atom_x[0]));
    CHECK(dis_contains(vs, kQuad, p.atom_x[1]));
    // a constraint eliminating g removes the disagreement
    LabeledBatch cb;
    cb.append(1, p.atom_x[1], +1);
    double fr = empirical_risk(cls, kQuad, cls.members[1], to_samples(cb));
    vs = with_constraint(vs, kQuad, cb, fr + 0.01);
    CHECK(feasible_members(vs) == std::vector<std::size_t>{1});
    CHECK_FALSE(dis_contains(vs, kQuad, p.atom_x[1]));
  }
}

TEST_CASE("monotone dis_contains matches the sign-interval structure") {
  // one informative batch: negatives left, positives right
  FunctionClass cls = make_monotone_class(8);
  VersionSpace vs = make_version_space(cls);
  LabeledBatch cb;
  for (int k = 0; k < 16; ++k)
    cb.append(k + 1, (k + 0.5) / 16.0, k < 8 ? -1 : +1);
  CellStats st(cls, cb);
  Fn ideal(cls.grid);
  for (int j = 0; j < cls.grid; ++j) ideal[j] = j < 4 ? -1.0 : 1.0;
  // tight budget: every cell is sign-pinned (per-cell slack 0.4 < 1)
  VersionSpace tight =
      with_constraint(vs, kQuad, cb, st.risk(kQuad, ideal) + 0.02);
  CHECK_FALSE(dis_contains(tight, kQuad, 0.05));
  CHECK_FALSE(dis_contains(tight, kQuad, 0.5));
  CHECK_FALSE(dis_contains(tight, kQuad, 0.95));
  // loose budget: a single cell may cross zero (slack 1.55 > 1)
  VersionSpace loose =
      with_constraint(vs, kQuad, cb, st.risk(kQuad, ideal) + 0.3);
  CHECK(dis_contains(loose, kQuad, 0.5));
}

TEST_CASE("PAV matches the brute-force quadratic program") {
  Rng rng(29);
  for (int rep = 0; rep < 100; ++rep) {
    FunctionClass cls = make_monotone_class(6 + static_cast<int>(rng.below(5)));
    std::vector<LabeledSample> samples;
    std::size_t q = 1 + rng.below(8);
    for (std::size_t k = 0; k < q; ++k)
      samples.push_back({rng.uniform(), rng.sign()});
    Fn fast = erm(cls, kQuad, samples);
    Fn brute = brute_erm(cls, kQuad, samples);
    double r_fast = empirical_risk(cls, kQuad, fast, samples);
    double r_brute = empirical_risk(cls, kQuad, brute, samples);
    CHECK(std::abs(r_fast - r_brute) <= 1e-6);
  }
}

TEST_CASE("dis_contains equals enumeration on random finite version spaces") {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    FunctionClass cls = random_finite_class(rng, 4, 6);
    VersionSpace vs = make_version_space(cls);
    LabeledBatch cb = random_batch(rng, cls, 5);
    double minr = kInf;
    for (const auto& m : cls.members)
      minr = std::min(minr, empirical_risk(cls, kQuad, m, to_samples(cb)));
    vs = with_constraint(vs, kQuad, cb, minr + 0.5 * rng.uniform());
    auto feas = feasible_members(vs);
    for (double x : cls.atoms) {
      bool pos = false, neg = false;
      for (std::size_t i : feas)
        (sgn(cls.members[i][cls.atom_index(x)]) > 0 ? pos : neg) = true;
      CHECK(dis_contains(vs, kQuad, x) == (pos && neg));
    }
  }
}
