#include <catch_amalgamated.hpp>

#include "eigo/funcspace.hpp"
#include "eigo/posterior.hpp"

using namespace eigo;

namespace {
Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("RKHS span functions") {
  const KernelSpec spec = KernelSpec::matern(1.5, v1(0.4));

  SECTION("single center, unit weight: value at the center is mu + 1") {
    const RkhsSpanFunction f(spec, {v1(0.5)}, Vec::Ones(1), 2.0);
    CHECK_THAT(f(v1(0.5)), Catch::Matchers::WithinAbs(3.0, 1e-15));
    CHECK_THAT(f.norm, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
  SECTION("zero weights: constant mu") {
    const RkhsSpanFunction f(spec, {v1(0.2), v1(0.8)}, Vec::Zero(2), -1.5);
    for (double x : {0.0, 0.3, 0.77, 1.0})
      CHECK(f(v1(x)) == -1.5);
    CHECK(f.norm == 0.0);
  }
  SECTION("distant centers, unit weights: norm^2 = 2") {
    const KernelSpec tight = KernelSpec::matern(0.5, v1(0.01));
    const RkhsSpanFunction f(tight, {v1(0.0), v1(1.0)}, Vec::Ones(2));
    CHECK_THAT(f.norm * f.norm, Catch::Matchers::WithinAbs(2.0, 1e-10));
  }
  SECTION("norm consistency and evaluation at centers") {
    Rng rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss;
    std::vector<Vec> centers;
    while (centers.size() < 5) {
      Vec x = v2(unif(rng), unif(rng));
      bool ok = true;
      for (const auto& p : centers)
        if ((x - p).norm() < 0.05) ok = false;
      if (ok) centers.push_back(x);
    }
    Vec lam(5);
    for (int i = 0; i < 5; ++i) lam[i] = gauss(rng);
    const KernelSpec spec2 = KernelSpec::matern(2.5, v2(0.5, 0.7));
    const RkhsSpanFunction f(spec2, centers, lam, 0.3);
    const Mat V = gram(spec2, centers);
    CHECK_THAT(f.norm * f.norm,
               Catch::Matchers::WithinAbs(lam.dot(V * lam), 1e-10));
    for (int j = 0; j < 5; ++j) {
      double expect = 0.3;
      for (int i = 0; i < 5; ++i) expect += lam[i] * V(j, i);
      CHECK_THAT(eval_span(f, centers[j]), Catch::Matchers::WithinAbs(expect, 1e-12));
    }
  }
  SECTION("observing a span function never exceeds its norm") {
    Rng rng(6);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<Vec> centers;
      while (centers.size() < 6) {
        Vec x = v1(unif(rng));
        bool ok = true;
        for (const auto& p : centers)
          if ((x - p).norm() < 0.05) ok = false;
        if (ok) centers.push_back(x);
      }
      Vec lam(6);
      for (int i = 0; i < 6; ++i) lam[i] = gauss(rng);
      const RkhsSpanFunction f(spec, centers, lam);
      DesignSet design;
      for (int i = 0; i < 4; ++i) {
        const Vec x = v1(unif(rng));
        bool dup = false;
        for (const auto& p : design.points)
          if ((x - p).norm() < 1e-6) dup = true;
        if (dup) continue;
        design.add(x, f(x));
      }
      if (design.size() == 0) continue;
      CHECK(fit(spec, design).reduced_ss() <= f.norm * f.norm + 1e-8);
    }
  }
}

TEST_CASE("bump functions") {
  const BumpFunction b(v2(0.5, 0.5), 0.2, -3.0);

  SECTION("value at the center is the depth") {
    CHECK(b(v2(0.5, 0.5)) == -3.0);
  }
  SECTION("zero on and outside the boundary sphere") {
    CHECK(b(v2(0.7, 0.5)) == 0.0);
    CHECK(b(v2(0.9, 0.9)) == 0.0);
    CHECK(b(v2(0.5 + 0.2 / std::sqrt(2.0), 0.5 + 0.2 / std::sqrt(2.0))) == 0.0);
  }
  SECTION("r = 1/sqrt(2) gives depth / e") {
    const double r = 0.2 / std::sqrt(2.0);
    CHECK_THAT(b(v2(0.5 + r, 0.5)),
               Catch::Matchers::WithinRel(-3.0 * std::exp(-1.0), 1e-12));
  }
  SECTION("continuity across the support boundary") {
    for (double eps : {1e-3, 1e-6, 1e-9})
      CHECK(std::abs(eval_bump(b, v2(0.5 + 0.2 - eps, 0.5))) < 1e-2);
  }
}

TEST_CASE("counterexample pair") {
  const Box box = Box::unit(1);
  const CounterexamplePair pair = make_counterexample(box);

  SECTION("default geometry mirrors the 1-d figure") {
    CHECK_THAT(pair.r0, Catch::Matchers::WithinAbs(0.2, 1e-15));
    CHECK_THAT(pair.r1, Catch::Matchers::WithinAbs(0.05, 1e-15));
    CHECK(pair.w_radius == 0.03);
    CHECK(pair.spike_center[0] == 0.5);
    // V0 = [0, 0.3] u [0.7, 1], V1 = [0.45, 0.55]; boundary points probed a
    // hair inside to stay clear of floating-point edge rounding
    CHECK(pair.in_v0(v1(0.299)));
    CHECK(pair.in_v0(v1(0.0)));
    CHECK(pair.in_v0(v1(0.701)));
    CHECK(pair.in_v0(v1(1.0)));
    CHECK_FALSE(pair.in_v0(v1(0.31)));
    CHECK_FALSE(pair.in_v0(v1(0.69)));
    CHECK(pair.in_v1(v1(0.451)));
    CHECK(pair.in_v1(v1(0.549)));
    CHECK_FALSE(pair.in_v1(v1(0.44)));
    CHECK_FALSE(pair.in_v1(v1(0.56)));
    CHECK(pair.in_w(v1(0.5)));
    CHECK_FALSE(pair.in_w(v1(0.53)));
  }
  SECTION("plateau levels: 0 on V0, 1 on V1") {
    for (double x : {0.0, 0.1, 0.3, 0.7, 0.9, 1.0}) CHECK(pair.f_plateau(v1(x)) == 0.0);
    for (double x : {0.45, 0.5, 0.55}) CHECK(pair.f_plateau(v1(x)) == 1.0);
    for (double x = 0.31; x < 0.45; x += 0.01) {
      const double v = pair.f_plateau(v1(x));
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
  SECTION("spike bottom: g at the spike center is -1") {
    CHECK_THAT(pair.g_spiked(pair.spike_center),
               Catch::Matchers::WithinAbs(-1.0, 1e-15));
  }
  SECTION("f and g agree outside W") {
    Rng rng(8);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
      const Vec x = v1(unif(rng));
      if (pair.in_w(x)) continue;
      CHECK(pair.f_plateau(x) == pair.g_spiked(x));
      ++checked;
    }
  }
  SECTION("grid minima: min f = 0, min g = -1") {
    double min_f = 1e300, min_g = 1e300;
    for (int i = 0; i <= 10000; ++i) {
      const Vec x = v1(i / 10000.0);
      min_f = std::min(min_f, pair.f_plateau(x));
      min_g = std::min(min_g, pair.g_spiked(x));
    }
    CHECK(min_f == 0.0);
    CHECK_THAT(min_g, Catch::Matchers::WithinAbs(-1.0, 1e-6));
  }
  SECTION("invalid geometry rejected") {
    CHECK_THROWS_AS(make_counterexample(box, 0.3, 0.06), config_error);
  }
  SECTION("seeded spike jitter keeps W inside V1") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 17ull}) {
      const CounterexamplePair p = make_counterexample(box, 0.3, 0.03, seed);
      CHECK((p.spike_center - p.plateau_center).norm() + p.w_radius <= p.r1 + 1e-12);
      CHECK_THAT(p.g_spiked(p.spike_center), Catch::Matchers::WithinAbs(-1.0, 1e-15));
    }
  }
}

TEST_CASE("adversarial bump family") {
  SECTION("k=1, d=1: two members on the half-intervals") {
    const BumpFamily fam = make_bump_family(1, 1, 0.5, 1.0);
    REQUIRE(fam.size() == 2);
    CHECK(fam.members[0](v1(0.25)) < 0.0);
    CHECK(fam.members[0](v1(0.75)) == 0.0);
    CHECK(fam.members[1](v1(0.75)) < 0.0);
    CHECK(fam.members[1](v1(0.25)) == 0.0);
    CHECK(fam.members[0](v1(0.5)) == 0.0);
    CHECK(fam.members[1](v1(0.5)) == 0.0);
  }
  SECTION("member minimum is -C (2k)^{-nu} at the subcube center") {
    for (int k : {1, 2, 4}) {
      for (double nu : {0.5, 2.5}) {
        const double C = 1.7;
        const BumpFamily fam = make_bump_family(k, 1, nu, C);
        REQUIRE(fam.size() == 2 * k);
        const double expect = -C * std::pow(2.0 * k, -nu);
        for (const auto& m : fam.members) {
          CHECK_THAT(m(m.center), Catch::Matchers::WithinRel(expect, 1e-12));
          CHECK_THAT(fam.member_min(), Catch::Matchers::WithinRel(expect, 1e-12));
        }
      }
    }
  }
  SECTION("loss scaling across k: ratios 2^{-nu}") {
    for (double nu : {0.5, 1.5}) {
      const double m1 = make_bump_family(1, 1, nu, 1.0).member_min();
      const double m2 = make_bump_family(2, 1, nu, 1.0).member_min();
      const double m4 = make_bump_family(4, 1, nu, 1.0).member_min();
      CHECK_THAT(m2 / m1, Catch::Matchers::WithinAbs(std::pow(2.0, -nu), 1e-9));
      CHECK_THAT(m4 / m2, Catch::Matchers::WithinAbs(std::pow(2.0, -nu), 1e-9));
    }
  }
  SECTION("pairwise disjoint supports on a dense grid") {
    const BumpFamily fam = make_bump_family(2, 1, 0.5, 1.0);
    for (int g = 0; g <= 4000; ++g) {
      const Vec x = v1(g / 4000.0);
      int active = 0;
      for (const auto& m : fam.members)
        if (m(x) != 0.0) ++active;
      CHECK(active <= 1);
    }
    // d = 2 spot check
    const BumpFamily fam2 = make_bump_family(1, 2, 1.5, 1.0);
    REQUIRE(fam2.size() == 4);
    for (int gx = 0; gx <= 60; ++gx)
      for (int gy = 0; gy <= 60; ++gy) {
        const Vec x = v2(gx / 60.0, gy / 60.0);
        int active = 0;
        for (const auto& m : fam2.members)
          if (m(x) != 0.0) ++active;
        CHECK(active <= 1);
      }
  }
}
