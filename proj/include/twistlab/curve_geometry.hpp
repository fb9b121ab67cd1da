#pragma once

// Reference curve of the tube: curvature/twist profiles built from bump
// primitives, Runge-Kutta integration of the moving frame, the tube map, and
// the closed-form metric data attached to it.  Everything downstream (operator
// assembly, constants, thresholds) consumes these types.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "twistlab/bumps.hpp"
#include "twistlab/errors.hpp"

namespace twistlab {

// Curvatures kappa1 (bending, must stay positive where defined), kappa2
// (torsion) and the twist rate theta_dot are sums of compactly supported
// bumps inside (s_a, s_b).  The angle theta is the exact antiderivative of
// theta_dot, zero on the left tail.  Samples live on a uniform grid over
// [s_a, s_b]; closed-form values remain available at arbitrary s through the
// stored bump lists.
struct CurvatureProfile {
  double s_a = 0.0, s_b = 0.0;
  double delta_s = 0.0;  // actual grid spacing after rounding to the node count
  std::vector<Bump> kappa1, kappa2, theta_dot;

  std::vector<double> s;
  std::vector<double> k1, dk1, k2, theta, th_dot, th_ddot;

  double sup_kappa1 = 0.0, sup_dkappa1 = 0.0, sup_kappa2 = 0.0;
  double sup_theta_dot = 0.0, sup_theta_ddot = 0.0;

  double length() const { return s_b - s_a; }
  int size() const { return int(s.size()); }

  double kappa1_at(double x) const { return eval(kappa1, x); }
  double dkappa1_at(double x) const { return eval_derivative(kappa1, x); }
  double kappa2_at(double x) const { return eval(kappa2, x); }
  double dkappa2_at(double x) const { return eval_derivative(kappa2, x); }
  double theta_dot_at(double x) const { return eval(theta_dot, x); }
  double theta_ddot_at(double x) const { return eval_derivative(theta_dot, x); }
  double theta_at(double x) const { return eval_antiderivative(theta_dot, x); }
  double total_twist() const { return eval_antiderivative(theta_dot, s_b); }
};

namespace detail {

inline void require_support_inside(const std::vector<Bump>& bumps, double s_a, double s_b,
                                   const char* name) {
  if (bumps.empty()) return;
  auto [lo, hi] = support_hull(bumps);
  const double tol = 1e-12 * std::max(1.0, std::max(std::abs(s_a), std::abs(s_b)));
  if (lo < s_a - tol || hi > s_b + tol)
    throw InvalidProfileError(std::string(name) + " bumps reach outside (" +
                              std::to_string(s_a) + ", " + std::to_string(s_b) + ")");
}

}  // namespace detail

inline CurvatureProfile make_profile(std::vector<Bump> kappa1, std::vector<Bump> kappa2,
                                     std::vector<Bump> theta_dot, double s_a, double s_b,
                                     double delta_s) {
  if (!(s_b > s_a)) throw InvalidProfileError("empty support interval");
  if (!(delta_s > 0.0)) throw InvalidProfileError("grid spacing must be positive");
  for (auto* fam : {&kappa1, &kappa2, &theta_dot})
    for (const Bump& b : *fam) validate(b);
  detail::require_support_inside(kappa1, s_a, s_b, "kappa1");
  detail::require_support_inside(kappa2, s_a, s_b, "kappa2");
  detail::require_support_inside(theta_dot, s_a, s_b, "theta_dot");

  CurvatureProfile p;
  p.s_a = s_a;
  p.s_b = s_b;
  p.kappa1 = std::move(kappa1);
  p.kappa2 = std::move(kappa2);
  p.theta_dot = std::move(theta_dot);

  const int n = std::max(2, int(std::lround((s_b - s_a) / delta_s)) + 1);
  p.delta_s = (s_b - s_a) / double(n - 1);
  p.s.resize(n);
  p.k1.resize(n);
  p.dk1.resize(n);
  p.k2.resize(n);
  p.theta.resize(n);
  p.th_dot.resize(n);
  p.th_ddot.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = s_a + p.delta_s * i;
    p.s[i] = x;
    p.k1[i] = p.kappa1_at(x);
    p.dk1[i] = p.dkappa1_at(x);
    p.k2[i] = p.kappa2_at(x);
    p.theta[i] = p.theta_at(x);
    p.th_dot[i] = p.theta_dot_at(x);
    p.th_ddot[i] = p.theta_ddot_at(x);
  }

  // A bending profile must be strictly positive throughout the interior of
  // the interval; probe nodes and midpoints.
  if (!p.kappa1.empty()) {
    for (int i = 1; i < 2 * (n - 1); ++i) {
      const double x = s_a + 0.5 * p.delta_s * i;
      if (!(p.kappa1_at(x) > 0.0))
        throw InvalidProfileError("kappa1 not strictly positive at s = " + std::to_string(x));
    }
  }

  p.sup_kappa1 = sup_abs(p.kappa1);
  p.sup_dkappa1 = sup_abs_derivative(p.kappa1);
  p.sup_kappa2 = sup_abs(p.kappa2);
  p.sup_theta_dot = sup_abs(p.theta_dot);
  p.sup_theta_ddot = sup_abs_derivative(p.theta_dot);
  return p;
}

// Frame samples along the profile grid.  Outside [s_a, s_b] all curvatures
// vanish, so the frame continues constant and the curve continues straight;
// frame_at applies that extension exactly.
struct FrameField {
  std::vector<double> s;
  std::vector<Eigen::Vector3d> gamma;
  std::vector<Eigen::Vector3d> e1, e2, e3;
  std::vector<Eigen::Vector3d> re2, re3;  // twist-rotated normals
  double delta_s = 0.0;
  double max_gram_defect = 0.0;
};

inline FrameField integrate_frame(const CurvatureProfile& p) {
  const int n = p.size();
  FrameField f;
  f.s = p.s;
  f.delta_s = p.delta_s;
  f.gamma.resize(n);
  f.e1.resize(n);
  f.e2.resize(n);
  f.e3.resize(n);
  f.re2.resize(n);
  f.re3.resize(n);

  // State y = (Gamma, E) with rows of E the frame vectors:
  //   Gamma' = e1,   E' = K(s) E,   K = [[0,k1,0],[-k1,0,k2],[0,-k2,0]].
  auto K = [&p](double x) {
    Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
    const double a = p.kappa1_at(x), b = p.kappa2_at(x);
    k(0, 1) = a;
    k(1, 0) = -a;
    k(1, 2) = b;
    k(2, 1) = -b;
    return k;
  };

  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  Eigen::Matrix3d E = Eigen::Matrix3d::Identity();
  const double h = p.delta_s;
  for (int i = 0;; ++i) {
    f.gamma[i] = g;
    f.e1[i] = E.row(0);
    f.e2[i] = E.row(1);
    f.e3[i] = E.row(2);
    const double c = std::cos(p.theta[i]), sn = std::sin(p.theta[i]);
    f.re2[i] = c * f.e2[i] - sn * f.e3[i];
    f.re3[i] = sn * f.e2[i] + c * f.e3[i];
    const Eigen::Matrix3d gram = E * E.transpose();
    f.max_gram_defect =
        std::max(f.max_gram_defect, (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    if (i == n - 1) break;

    const double x = p.s[i];
    const Eigen::Matrix3d k1m = K(x), k2m = K(x + 0.5 * h), k4m = K(x + h);
    const Eigen::Matrix3d E1 = k1m * E;
    const Eigen::Matrix3d E2 = k2m * (E + 0.5 * h * E1);
    const Eigen::Matrix3d E3 = k2m * (E + 0.5 * h * E2);
    const Eigen::Matrix3d E4 = k4m * (E + h * E3);
    const Eigen::Vector3d g1 = E.row(0);
    const Eigen::Vector3d g2 = (E + 0.5 * h * E1).row(0);
    const Eigen::Vector3d g3 = (E + 0.5 * h * E2).row(0);
    const Eigen::Vector3d g4 = (E + h * E3).row(0);
    E += (h / 6.0) * (E1 + 2.0 * E2 + 2.0 * E3 + E4);
    g += (h / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
  }

  if (f.max_gram_defect > 1e-6)
    throw DiscretizationError("integrate_frame: orthonormality drift " +
                              std::to_string(f.max_gram_defect) +
                              " exceeds 1e-6; reduce delta_s");
  return f;
}

// Frame at arbitrary arclength.  Beyond the grid the tube is straight: the
// frame is frozen at the nearer endpoint and Gamma extends affinely.  Inside
// the grid s snaps to the nearest sample (resolution delta_s).
struct FramePoint {
  Eigen::Vector3d gamma, e1, re2, re3;
};

inline FramePoint frame_at(const FrameField& f, double x) {
  FramePoint q;
  if (x <= f.s.front()) {
    q.gamma = f.gamma.front() + (x - f.s.front()) * f.e1.front();
    q.e1 = f.e1.front();
    q.re2 = f.re2.front();
    q.re3 = f.re3.front();
    return q;
  }
  if (x >= f.s.back()) {
    q.gamma = f.gamma.back() + (x - f.s.back()) * f.e1.back();
    q.e1 = f.e1.back();
    q.re2 = f.re2.back();
    q.re3 = f.re3.back();
    return q;
  }
  const int i = int(std::lround((x - f.s.front()) / f.delta_s));
  q.gamma = f.gamma[i];
  q.e1 = f.e1[i];
  q.re2 = f.re2[i];
  q.re3 = f.re3[i];
  return q;
}

inline Eigen::Vector3d tube_map(const FrameField& f, int i, double t2, double t3) {
  return f.gamma[i] + t2 * f.re2[i] + t3 * f.re3[i];
}

inline Eigen::Vector3d tube_map(const FrameField& f, double x, double t2, double t3) {
  const FramePoint q = frame_at(f, x);
  return q.gamma + t2 * q.re2 + t3 * q.re3;
}

// Closed-form metric data of the tube immersion at (s, t2, t3).
struct MetricSample {
  double h = 1.0, h2 = 0.0, h3 = 0.0;
  double det = 1.0;  // = h^2
  Eigen::Matrix3d G = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d Ginv = Eigen::Matrix3d::Identity();
  Eigen::Vector3d dF = Eigen::Vector3d::Zero();  // gradient of F = log h / 2
};

inline MetricSample metric_at(const CurvatureProfile& p, double x, double t2, double t3) {
  const double k1 = p.kappa1_at(x), dk1 = p.dkappa1_at(x);
  const double k2 = p.kappa2_at(x), td = p.theta_dot_at(x);
  const double th = p.theta_at(x);
  const double c = std::cos(th), sn = std::sin(th);
  const double u = t2 * c + t3 * sn;   // component along the rotated e2
  const double v = -t2 * sn + t3 * c;  // component along the rotated e3

  MetricSample m;
  m.h = 1.0 - u * k1;
  if (!(m.h > 0.0))
    throw ImmersionError("metric degenerate: h = " + std::to_string(m.h) + " at s = " +
                         std::to_string(x));
  const double w = k2 - td;
  m.h2 = -t3 * w;
  m.h3 = t2 * w;
  const double hh = m.h * m.h;
  m.det = hh;

  m.G << hh + m.h2 * m.h2 + m.h3 * m.h3, m.h2, m.h3,
         m.h2, 1.0, 0.0,
         m.h3, 0.0, 1.0;
  m.Ginv << 1.0, -m.h2, -m.h3,
            -m.h2, hh + m.h2 * m.h2, m.h2 * m.h3,
            -m.h3, m.h2 * m.h3, hh + m.h3 * m.h3;
  m.Ginv /= hh;

  // h depends on s through both kappa1 and theta; t-derivatives rotate with theta
  const double d1h = -dk1 * u - k1 * td * v;
  const double d2h = -k1 * c;
  const double d3h = -k1 * sn;
  m.dF = Eigen::Vector3d(d1h, d2h, d3h) / (2.0 * m.h);
  return m;
}

struct InjectivityReport {
  double a = 0.0;
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;  // frame displacement rates per unit arclength / 2
  double injectivity_bound = 0.0;       // max{4|I|^2 k1^2, 4a k2}
  bool immersion_ok = false;            // a sup|kappa1| < 1
  bool certified = false;               // immersion_ok and injectivity_bound < 1
};

// Sufficient criterion only: certified == false means "inconclusive", never
// "self-intersecting".
inline InjectivityReport check_injectivity(const CurvatureProfile& p, double a) {
  InjectivityReport r;
  r.a = a;
  r.k1 = p.sup_kappa1;
  r.k2 = p.sup_kappa1 + p.sup_kappa2;
  r.k3 = p.sup_kappa2;
  const double len = p.length();
  r.injectivity_bound =
      std::max(4.0 * len * len * p.sup_kappa1 * p.sup_kappa1, 4.0 * a * r.k2);
  r.immersion_ok = a * p.sup_kappa1 < 1.0;
  r.certified = r.immersion_ok && r.injectivity_bound < 1.0;
  return r;
}

inline std::pair<double, double> ellipticity_bounds(const CurvatureProfile& p, double a) {
  const double e = a * p.sup_kappa1;
  if (!(e < 1.0))
    throw ImmersionError("a * sup|kappa1| = " + std::to_string(e) + " >= 1");
  return {1.0 - e, 1.0 + e};
}

// Brute-force separation scan: cross sections at arclength distance >= window
// sit inside balls of radius a around Gamma, so min |Gamma(s) - Gamma(s')| - 2a
// over such pairs being positive rules out their overlap.  Resolution-limited
// advisory check; the certificate remains check_injectivity.
struct SeparationScan {
  double min_gap = 0.0;
  double window = 0.0;
  double grid_spacing = 0.0;
  bool ok = false;
};

inline SeparationScan scan_tube_separation(const FrameField& f, double a, double window = 0.0,
                                           int stride = 1) {
  SeparationScan r;
  if (window <= 0.0) window = 4.0 * a;
  r.window = window;
  r.grid_spacing = f.delta_s * stride;

  // include straight tails of one interval length on both sides
  std::vector<double> s;
  std::vector<Eigen::Vector3d> pts;
  const double len = f.s.back() - f.s.front();
  const double tail_step = std::max(r.grid_spacing, len / 64.0);
  for (double x = f.s.front() - len; x < f.s.front(); x += tail_step) {
    s.push_back(x);
    pts.push_back(frame_at(f, x).gamma);
  }
  for (std::size_t i = 0; i < f.s.size(); i += std::size_t(stride)) {
    s.push_back(f.s[i]);
    pts.push_back(f.gamma[i]);
  }
  for (double x = f.s.back() + tail_step; x <= f.s.back() + len; x += tail_step) {
    s.push_back(x);
    pts.push_back(frame_at(f, x).gamma);
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (s[j] - s[i] < window) continue;
      best = std::min(best, (pts[j] - pts[i]).norm() - 2.0 * a);
    }
  r.min_gap = std::isfinite(best) ? best : std::numeric_limits<double>::infinity();
  r.ok = r.min_gap > 0.0;
  return r;
}

}  // namespace twistlab
