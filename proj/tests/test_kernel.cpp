#include <catch_amalgamated.hpp>

#include <Eigen/Cholesky>

#include "eigo/kernel.hpp"
#include "support/oracles.hpp"

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

TEST_CASE("eval_base closed forms") {
  const Vec th = v1(1.0);
  const std::vector<KernelSpec> families = {
      KernelSpec::matern(0.5, th), KernelSpec::matern(1.5, th),
      KernelSpec::matern(2.5, th), KernelSpec::matern(3.5, th),
      KernelSpec::gaussian(th)};

  SECTION("K(0) = 1 exactly for every family") {
    for (const auto& spec : families) CHECK(eval_base(spec, 0.0) == 1.0);
  }
  SECTION("Gaussian at r = 1") {
    CHECK_THAT(eval_base(KernelSpec::gaussian(th), 1.0),
               Catch::Matchers::WithinAbs(std::exp(-0.5), 1e-15));
  }
  SECTION("Matern nu = 1/2 at r = 1") {
    CHECK_THAT(eval_base(KernelSpec::matern(0.5, th), 1.0),
               Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-15));
  }
  SECTION("Matern nu = 3/2 at r = 1") {
    const double s3 = std::sqrt(3.0);
    CHECK_THAT(eval_base(KernelSpec::matern(1.5, th), 1.0),
               Catch::Matchers::WithinAbs((1.0 + s3) * std::exp(-s3), 1e-15));
  }
  SECTION("monotone non-increasing on a dense grid") {
    for (const auto& spec : families) {
      double prev = 1.0;
      for (int i = 1; i <= 1000; ++i) {
        const double cur = eval_base(spec, 0.01 * i);
        CHECK(cur <= prev + 1e-15);
        CHECK(cur > 0.0);
        prev = cur;
      }
    }
  }
  SECTION("half-integer closed forms match the Bessel quadrature oracle") {
    for (double nu : {0.5, 1.5}) {
      const KernelSpec spec = KernelSpec::matern(nu, th);
      for (double r : {0.1, 1.0, 10.0}) {
        CHECK_THAT(eval_base(spec, r),
                   Catch::Matchers::WithinAbs(oracle::matern_bessel(nu, r), 1e-10));
      }
    }
  }
  SECTION("unsupported nu rejected at construction") {
    CHECK_THROWS_AS(KernelSpec::matern(1.0, th), config_error);
    CHECK_THROWS_AS(KernelSpec::matern(0.25, th), config_error);
    CHECK_THROWS_AS(KernelSpec::matern(0.5, v1(0.0)), config_error);
  }
}

TEST_CASE("eval_scaled applies per-coordinate length-scales") {
  SECTION("zero lag gives 1") {
    const KernelSpec spec = KernelSpec::matern(2.5, v2(0.3, 7.0));
    CHECK(eval_scaled(spec, v2(0.0, 0.0)) == 1.0);
  }
  SECTION("Gaussian theta = 2 at t = 2") {
    const KernelSpec spec = KernelSpec::gaussian(v1(2.0));
    CHECK_THAT(eval_scaled(spec, v1(2.0)),
               Catch::Matchers::WithinAbs(std::exp(-0.5), 1e-15));
  }
  SECTION("Matern 1/2 isotropic at t = (3,4)") {
    const KernelSpec spec = KernelSpec::matern(0.5, v2(1.0, 1.0));
    CHECK_THAT(eval_scaled(spec, v2(3.0, 4.0)),
               Catch::Matchers::WithinAbs(std::exp(-5.0), 1e-14));
  }
  SECTION("dimension mismatch rejected") {
    const KernelSpec spec = KernelSpec::matern(0.5, v1(1.0));
    CHECK_THROWS_AS(eval_scaled(spec, v2(1.0, 2.0)), dimension_error);
  }
  SECTION("larger theta never decreases correlation") {
    Rng rng(7);
    std::uniform_real_distribution<double> unif(0.1, 3.0);
    for (int rep = 0; rep < 200; ++rep) {
      const Vec small = v2(unif(rng), unif(rng));
      const Vec big = 2.0 * small;
      const Vec t = v2(unif(rng) - 1.5, unif(rng) - 1.5);
      for (double nu : {0.5, 1.5, 2.5, 3.5}) {
        CHECK(eval_scaled(KernelSpec::matern(nu, big), t) >=
              eval_scaled(KernelSpec::matern(nu, small), t) - 1e-15);
      }
      CHECK(eval_scaled(KernelSpec::gaussian(big), t) >=
            eval_scaled(KernelSpec::gaussian(small), t) - 1e-15);
    }
  }
}

TEST_CASE("gram assembly") {
  SECTION("single point") {
    const KernelSpec spec = KernelSpec::matern(0.5, v1(1.0));
    const Mat V = gram(spec, {v1(0.3)});
    REQUIRE(V.rows() == 1);
    CHECK(V(0, 0) == 1.0);
  }
  SECTION("two points, Matern 1/2") {
    const KernelSpec spec = KernelSpec::matern(0.5, v1(1.0));
    const Mat V = gram(spec, {v1(0.0), v1(1.0)});
    CHECK(V(0, 0) == 1.0);
    CHECK(V(1, 1) == 1.0);
    CHECK_THAT(V(0, 1), Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-15));
    CHECK(V(0, 1) == V(1, 0));
  }
  SECTION("translation invariance") {
    const KernelSpec spec = KernelSpec::matern(2.5, v2(0.5, 1.5));
    std::vector<Vec> pts = {v2(0.1, 0.2), v2(0.7, 0.9), v2(0.4, 0.3)};
    const Mat V1 = gram(spec, pts);
    for (auto& p : pts) p = p + v2(13.0, -2.0);
    const Mat V2 = gram(spec, pts);
    CHECK((V1 - V2).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("duplicate points rejected with the pair named") {
    const KernelSpec spec = KernelSpec::matern(0.5, v1(1.0));
    try {
      gram(spec, {v1(0.0), v1(0.5), v1(0.5 + 1e-12)});
      FAIL("expected duplicate rejection");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("1") != std::string::npos);
      CHECK(msg.find("2") != std::string::npos);
    }
  }
  SECTION("positive definite under the jitter policy on random sets") {
    Rng rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> nd(1, 20), dd(1, 3);
    std::vector<double> nus = {0.5, 1.5, 2.5, 3.5, -1.0};
    for (int rep = 0; rep < 100; ++rep) {
      const int n = nd(rng), d = dd(rng);
      std::vector<Vec> pts;
      for (int i = 0; i < n; ++i) {
        Vec x(d);
        for (int j = 0; j < d; ++j) x[j] = unif(rng);
        pts.push_back(x);
      }
      const double nu = nus[rep % nus.size()];
      const KernelSpec spec = nu < 0 ? KernelSpec::gaussian(Vec::Ones(d))
                                     : KernelSpec::matern(nu, Vec::Ones(d));
      Mat V = gram(spec, pts);
      Eigen::LLT<Mat> llt(V);
      if (llt.info() != Eigen::Success) {
        V.diagonal().array() += 1e-10;
        llt.compute(V);
      }
      CHECK(llt.info() == Eigen::Success);
    }
  }
}

TEST_CASE("cross covariance") {
  const KernelSpec spec = KernelSpec::gaussian(v1(1.0));
  SECTION("at a design point") {
    const Vec v = cross(spec, {v1(0.4)}, v1(0.4));
    REQUIRE(v.size() == 1);
    CHECK(v[0] == 1.0);
  }
  SECTION("Gaussian, points = {0}, x = 1") {
    const Vec v = cross(spec, {v1(0.0)}, v1(1.0));
    CHECK_THAT(v[0], Catch::Matchers::WithinAbs(std::exp(-0.5), 1e-15));
  }
  SECTION("matches the gram column of the augmented set") {
    const KernelSpec m = KernelSpec::matern(1.5, v2(0.7, 1.3));
    std::vector<Vec> pts = {v2(0.1, 0.9), v2(0.6, 0.2), v2(0.3, 0.5)};
    const Vec x = v2(0.8, 0.8);
    const Vec v = cross(m, pts, x);
    std::vector<Vec> aug = pts;
    aug.push_back(x);
    const Mat V = gram(m, aug);
    for (int i = 0; i < 3; ++i) CHECK(v[i] == V(i, 3));
  }
}
