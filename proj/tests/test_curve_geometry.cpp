#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "twistlab/curve_geometry.hpp"

using namespace twistlab;

namespace {

constexpr double kPi = std::numbers::pi;

Bump cos2(double center, double half_width, double amplitude) {
  return Bump{Bump::Kind::cos2, center, half_width, amplitude, 0.0};
}

Bump plateau(double center, double half_width, double amplitude, double ramp) {
  return Bump{Bump::Kind::plateau, center, half_width, amplitude, ramp};
}

CurvatureProfile generic_profile(double delta_s) {
  return make_profile({cos2(0.0, 1.0, 0.8)}, {cos2(0.2, 0.6, 0.3)}, {cos2(-0.1, 0.7, 1.2)},
                      -1.0, 1.0, delta_s);
}

}  // namespace

TEST_CASE("profile construction and sup norms") {
  SECTION("straight untwisted: all norms zero") {
    auto p = make_profile({}, {}, {}, -1.0, 1.0, 0.01);
    CHECK(p.sup_kappa1 == 0.0);
    CHECK(p.sup_dkappa1 == 0.0);
    CHECK(p.sup_kappa2 == 0.0);
    CHECK(p.sup_theta_dot == 0.0);
    CHECK(p.sup_theta_ddot == 0.0);
    CHECK(p.total_twist() == 0.0);
  }
  SECTION("single cosine-squared bend on the unit interval") {
    const double eps = 0.37;
    auto p = make_profile({cos2(0.0, 0.5, eps)}, {}, {}, -0.5, 0.5, 1e-3);
    CHECK(p.sup_kappa1 == Catch::Approx(eps).epsilon(1e-12));
    CHECK(p.sup_dkappa1 == Catch::Approx(eps * kPi).epsilon(1e-10));
  }
  SECTION("twist rate bump: amplitude and accumulated angle") {
    const double beta = 2.1;
    auto p = make_profile({}, {}, {cos2(0.0, 0.5, beta)}, -0.5, 0.5, 1e-3);
    CHECK(p.sup_theta_dot == Catch::Approx(beta).epsilon(1e-12));
    CHECK(p.total_twist() == Catch::Approx(beta / 2.0).epsilon(1e-12));
    CHECK(p.theta_at(-0.5) == 0.0);
  }
  SECTION("sampled derivatives match centered differences at second order") {
    auto p = generic_profile(1e-3);
    double worst = 0.0;
    for (int i = 1; i + 1 < p.size(); ++i) {
      const double cd = (p.k1[i + 1] - p.k1[i - 1]) / (2.0 * p.delta_s);
      worst = std::max(worst, std::abs(cd - p.dk1[i]));
    }
    CHECK(worst < 1e-5);  // ~ sup|kappa1'''| delta^2 / 6
  }
  SECTION("rejections") {
    CHECK_THROWS_AS(make_profile({cos2(0.0, 0.5, -1.0)}, {}, {}, -0.5, 0.5, 0.01),
                    InvalidProfileError);
    // bend support strictly inside the interval leaves kappa1 = 0 in part of it
    CHECK_THROWS_AS(make_profile({cos2(0.0, 0.5, 1.0)}, {}, {}, -1.0, 1.0, 0.01),
                    InvalidProfileError);
    // bumps must not reach outside the interval
    CHECK_THROWS_AS(make_profile({}, {cos2(0.9, 0.5, 1.0)}, {}, -1.0, 1.0, 0.01),
                    InvalidProfileError);
    CHECK_THROWS_AS(make_profile({}, {}, {}, 1.0, -1.0, 0.01), InvalidProfileError);
  }
}

TEST_CASE("frame integration") {
  SECTION("zero profile: identity frame, straight line") {
    auto p = make_profile({}, {}, {}, 0.0, 2.0, 0.01);
    auto f = integrate_frame(p);
    CHECK(f.max_gram_defect == 0.0);
    CHECK((f.e1.back() - Eigen::Vector3d::UnitX()).norm() == 0.0);
    CHECK((f.gamma.back() - Eigen::Vector3d(2.0, 0.0, 0.0)).norm() < 1e-14);
  }
  SECTION("planar bend turns e1 by the integrated curvature") {
    // plateau: amplitude 1 with ramps, total turning = integral of kappa1 = 3
    auto p = make_profile({plateau(0.0, 2.0, 1.0, 1.0)}, {}, {}, -2.0, 2.0, 1e-3);
    auto f = integrate_frame(p);
    const double alpha = 1.0 * (2.0 * 2.0 - 1.0);
    CHECK((f.e1.back() - Eigen::Vector3d(std::cos(alpha), std::sin(alpha), 0.0)).norm() < 1e-9);
    CHECK((f.e2.back() - Eigen::Vector3d(-std::sin(alpha), std::cos(alpha), 0.0)).norm() < 1e-9);
    CHECK((f.e3.back() - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
  }
  SECTION("orthonormality drift: fourth order in the step, small at 1e-3") {
    auto coarse = integrate_frame(generic_profile(0.02));
    auto half = integrate_frame(generic_profile(0.01));
    if (coarse.max_gram_defect > 1e-13 && half.max_gram_defect > 1e-14) {
      const double rate = coarse.max_gram_defect / half.max_gram_defect;
      CHECK(rate > 8.0);
    }
    auto fine = integrate_frame(generic_profile(1e-3));
    CHECK(fine.max_gram_defect <= 1e-8);
    // endpoint frame against a ten-times-finer reference run
    auto ref = integrate_frame(generic_profile(1e-4));
    CHECK((fine.e1.back() - ref.e1.back()).norm() < 1e-10);
    CHECK((fine.gamma.back() - ref.gamma.back()).norm() < 1e-10);
  }
  SECTION("frame is exactly constant past the curved stretch") {
    auto p = make_profile({}, {cos2(0.0, 0.5, 2.0)}, {}, -1.0, 1.0, 1e-3);
    auto f = integrate_frame(p);
    const int n = p.size();
    const int i0 = int(std::lround((0.6 - p.s_a) / p.delta_s));
    for (int i = i0; i < n; ++i) {
      CHECK((f.e2[i] - f.e2[i0]).norm() < 1e-12);
      const Eigen::Vector3d d = f.gamma[i] - f.gamma[i0];
      CHECK((d - d.norm() * f.e1[i0]).norm() < 1e-12);
    }
  }
  SECTION("coarse step over violent bending is refused") {
    auto p = make_profile({plateau(0.0, 2.0, 50.0, 0.5)}, {}, {}, -2.0, 2.0, 0.1);
    CHECK_THROWS_AS(integrate_frame(p), DiscretizationError);
  }
}

TEST_CASE("tube map") {
  SECTION("straight untwisted tube is a product") {
    auto p = make_profile({}, {}, {}, 0.0, 1.0, 0.01);
    auto f = integrate_frame(p);
    const Eigen::Vector3d q = tube_map(f, 37, 0.3, -0.2);
    CHECK((q - Eigen::Vector3d(f.s[37], 0.3, -0.2)).norm() < 1e-14);
    CHECK((tube_map(f, 12, 0.0, 0.0) - f.gamma[12]).norm() == 0.0);
  }
  SECTION("pure twist rotates the section by theta") {
    auto p = make_profile({}, {}, {cos2(0.0, 0.4, 1.5)}, -0.5, 0.5, 1e-3);
    auto f = integrate_frame(p);
    const int i = p.size() / 2 + 113;
    const double th = p.theta[i];
    const double t2 = 0.25, t3 = -0.1;
    const Eigen::Vector3d expect(f.s[i] - p.s_a, t2 * std::cos(th) + t3 * std::sin(th),
                                 -t2 * std::sin(th) + t3 * std::cos(th));
    CHECK((tube_map(f, i, t2, t3) - expect).norm() < 1e-12);
  }
  SECTION("affine extension beyond the grid") {
    auto p = make_profile({}, {}, {}, -1.0, 1.0, 0.01);
    auto f = integrate_frame(p);
    const Eigen::Vector3d q = tube_map(f, 3.5, 0.1, 0.1);
    CHECK((q - Eigen::Vector3d(4.5, 0.1, 0.1)).norm() < 1e-12);
  }
}

TEST_CASE("metric closed forms") {
  SECTION("straight untwisted: identity metric") {
    auto p = make_profile({}, {}, {}, -1.0, 1.0, 0.01);
    auto m = metric_at(p, 0.3, 0.2, -0.4);
    CHECK((m.G - Eigen::Matrix3d::Identity()).norm() == 0.0);
    CHECK(m.dF.norm() == 0.0);
  }
  SECTION("centerline: h = 1, unit volume factor") {
    auto p = generic_profile(0.01);
    auto m = metric_at(p, 0.24, 0.0, 0.0);
    CHECK(m.h == 1.0);
    CHECK(m.det == 1.0);
  }
  SECTION("algebraic identities at generic samples") {
    auto p = generic_profile(0.01);
    for (double x : {-0.7, -0.2, 0.11, 0.5}) {
      for (auto [t2, t3] : {std::pair{0.1, -0.15}, std::pair{-0.3, 0.2}, std::pair{0.0, 0.33}}) {
        auto m = metric_at(p, x, t2, t3);
        CHECK(m.G.determinant() == Catch::Approx(m.h * m.h).epsilon(1e-13));
        CHECK((m.Ginv * m.G - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::Matrix3d S = m.Ginv;
        S(1, 1) -= 1.0;
        S(2, 2) -= 1.0;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(S);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        const Eigen::Vector3d v(1.0, -m.h2, -m.h3);
        CHECK((S - v * v.transpose() / (m.h * m.h)).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
  SECTION("metric equals the Jacobian Gram matrix of the tube map") {
    const double ds = 5e-4;
    auto p = generic_profile(ds);
    auto f = integrate_frame(p);
    const int i = int(std::lround((0.3 - p.s_a) / p.delta_s));
    const double t2 = 0.1, t3 = -0.15;
    Eigen::Matrix3d J;
    J.col(0) = (tube_map(f, i + 1, t2, t3) - tube_map(f, i - 1, t2, t3)) / (2.0 * p.delta_s);
    J.col(1) = f.re2[i];  // map is affine in t
    J.col(2) = f.re3[i];
    const Eigen::Matrix3d G_fd = J.transpose() * J;
    auto m = metric_at(p, p.s[i], t2, t3);
    CHECK((G_fd - m.G).cwiseAbs().maxCoeff() < 5e-6);
  }
  SECTION("volume factor gradient against finite differences") {
    auto p = generic_profile(0.01);
    const double x = 0.17, t2 = 0.12, t3 = -0.21, e = 1e-6;
    auto F = [&](double a, double b, double c) {
      return 0.5 * std::log(metric_at(p, a, b, c).h);
    };
    auto m = metric_at(p, x, t2, t3);
    CHECK(m.dF(0) == Catch::Approx((F(x + e, t2, t3) - F(x - e, t2, t3)) / (2 * e)).margin(1e-7));
    CHECK(m.dF(1) == Catch::Approx((F(x, t2 + e, t3) - F(x, t2 - e, t3)) / (2 * e)).margin(1e-7));
    CHECK(m.dF(2) == Catch::Approx((F(x, t2, t3 + e) - F(x, t2, t3 - e)) / (2 * e)).margin(1e-7));
  }
  SECTION("immersion violation is refused") {
    auto p = make_profile({cos2(0.0, 1.0, 2.0)}, {}, {}, -1.0, 1.0, 0.01);
    CHECK_THROWS_AS(metric_at(p, 0.0, 0.6, 0.0), ImmersionError);
  }
}

TEST_CASE("injectivity certificate arithmetic") {
  SECTION("straight profile passes trivially") {
    auto p = make_profile({}, {}, {}, -1.0, 1.0, 0.01);
    auto r = check_injectivity(p, 0.3);
    CHECK(r.injectivity_bound == 0.0);
    CHECK(r.certified);
  }
  SECTION("strong bend on a unit interval is inconclusive") {
    auto p = make_profile({plateau(0.0, 0.5, 1.0, 0.25)}, {}, {}, -0.5, 0.5, 1e-3);
    // plateau peak gives sup kappa1 = 1 on |I| = 1
    CHECK(p.sup_kappa1 == Catch::Approx(1.0));
    auto r = check_injectivity(p, 0.1);
    CHECK(r.injectivity_bound == Catch::Approx(4.0));
    CHECK(r.immersion_ok);
    CHECK_FALSE(r.certified);
  }
  SECTION("mild bend and torsion is certified") {
    auto p = make_profile({plateau(0.0, 0.5, 0.2, 0.25)}, {plateau(0.0, 0.5, 0.1, 0.25)}, {},
                          -0.5, 0.5, 1e-3);
    CHECK(p.sup_kappa1 == Catch::Approx(0.2));
    CHECK(p.sup_kappa2 == Catch::Approx(0.1));
    auto r = check_injectivity(p, 0.2);
    CHECK(r.injectivity_bound == Catch::Approx(0.24));
    CHECK(r.certified);
  }
}

TEST_CASE("ellipticity bounds") {
  auto p = make_profile({cos2(0.0, 0.5, 0.2)}, {}, {}, -0.5, 0.5, 1e-3);
  auto [lo, hi] = ellipticity_bounds(p, 0.2);
  CHECK(lo == Catch::Approx(0.96));
  CHECK(hi == Catch::Approx(1.04));

  auto straight = make_profile({}, {}, {}, -0.5, 0.5, 0.01);
  auto [l2, h2] = ellipticity_bounds(straight, 0.4);
  CHECK(l2 == 1.0);
  CHECK(h2 == 1.0);

  SECTION("sampled h stays inside the bounds") {
    auto q = make_profile({cos2(0.0, 1.0, 1.0)}, {}, {cos2(0.0, 1.0, 0.7)}, -1.0, 1.0, 0.01);
    auto [a_lo, a_hi] = ellipticity_bounds(q, 0.5);
    CHECK(a_lo == Catch::Approx(0.5));
    CHECK(a_hi == Catch::Approx(1.5));
    for (double x = -1.0; x <= 1.0; x += 0.05)
      for (double r = 0.0; r <= 0.5; r += 0.1)
        for (double phi = 0.0; phi < 6.28; phi += 0.3) {
          auto m = metric_at(q, x, r * std::cos(phi), r * std::sin(phi));
          CHECK(m.h >= a_lo - 1e-12);
          CHECK(m.h <= a_hi + 1e-12);
        }
  }
  SECTION("flat tube refused") {
    auto q = make_profile({cos2(0.0, 0.5, 2.0)}, {}, {}, -0.5, 0.5, 1e-3);
    CHECK_THROWS_AS(ellipticity_bounds(q, 0.5), ImmersionError);
  }
}

TEST_CASE("frame displacement obeys the curvature rate bound") {
  auto p = generic_profile(2e-3);
  auto f = integrate_frame(p);
  const double len = p.length();
  const double k[3] = {p.sup_kappa1, p.sup_kappa1 + p.sup_kappa2, p.sup_kappa2};
  const std::vector<Eigen::Vector3d>* es[3] = {&f.e1, &f.e2, &f.e3};
  for (int i = 0; i < p.size(); i += 37)
    for (int j = i; j < p.size(); j += 61) {
      const double gap = std::min(std::abs(p.s[j] - p.s[i]), len);
      for (int c = 0; c < 3; ++c)
        CHECK(((*es[c])[j] - (*es[c])[i]).norm() <= 2.0 * k[c] * gap + 1e-9);
    }
}

TEST_CASE("separation scan") {
  SECTION("straight tube: gap grows without bound") {
    auto p = make_profile({}, {}, {}, -1.0, 1.0, 0.01);
    auto f = integrate_frame(p);
    auto r = scan_tube_separation(f, 0.2);
    CHECK(r.ok);
    CHECK(r.min_gap > 0.3);  // window 0.8 minus diameter 0.4
  }
  SECTION("U-turn: thin tube clears itself, fat tube does not") {
    // total turning = amplitude * (2w - r) = pi; the antiparallel tails run
    // roughly 1.1 apart, between the thin and fat diameters below
    auto p = make_profile({plateau(0.0, 1.0, 2.0 * kPi / 3.0, 0.5)}, {}, {}, -1.0, 1.0, 1e-3);
    auto f = integrate_frame(p);
    auto thin = scan_tube_separation(f, 0.05);
    CHECK(thin.ok);
    auto fat = scan_tube_separation(f, 0.6);
    CHECK_FALSE(fat.ok);
  }
}
