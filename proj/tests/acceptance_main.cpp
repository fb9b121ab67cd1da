// Acceptance gate: eleven end-to-end checks, one PASS/FAIL line each, with
// every tolerance pinned in this file.  Exit code is the number of failed
// checks.  Reference values come from independent closed forms (separable
// eigenvalues, Bessel-zero bisection, long-double re-derivations), never from
// the library under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "twistlab/curve_geometry.hpp"
#include "twistlab/hardy_constants.hpp"
#include "twistlab/stability_thresholds.hpp"
#include "twistlab/transverse.hpp"
#include "twistlab/waveguide_operators.hpp"

using namespace twistlab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

Bump cos2(double center, double half_width, double amplitude) {
  Bump b;
  b.kind = Bump::Kind::cos2;
  b.center = center;
  b.half_width = half_width;
  b.amplitude = amplitude;
  return b;
}

double ground_energy(const ShapeSpec& shape, double delta) {
  const CrossSectionDomain dom = build_domain(shape, delta);
  const TransverseOperator top = build_transverse_operator(dom);
  return dirichlet_ground_pair(dom, top).E1;
}

// First positive zero of the Bessel function J0 by bisection; independent of
// everything in the library.
double bessel_j0_first_zero() {
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::cyl_bessel_j(0.0, lo) * std::cyl_bessel_j(0.0, mid) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// 1. Transverse ground energies against separable / Bessel references.
Outcome criterion_1() {
  const double ref_square = 2.0 * kPi * kPi;
  const double e_square = ground_energy(ShapeSpec::rectangle(1.0, 1.0), 0.02);

  const double ref_rect = 1.25 * kPi * kPi;
  const double e_rect = ground_energy(ShapeSpec::rectangle(1.0, 2.0), 0.02);

  const double j01 = bessel_j0_first_zero();
  const double ref_disk = j01 * j01;
  const double e_disk = ground_energy(ShapeSpec::disk(1.0), 0.02);

  const bool ok = std::abs(e_square - ref_square) < 0.01 * ref_square &&
                  std::abs(e_rect - ref_rect) < 0.01 * ref_rect &&
                  std::abs(e_disk - ref_disk) < 0.01 * ref_disk;
  return {ok, "square " + num(e_square) + "/" + num(ref_square) + "  rect " + num(e_rect) +
                  "/" + num(ref_rect) + "  disk " + num(e_disk) + "/" + num(ref_disk)};
}

// 2. lambda vanishes (under refinement) for the disk, stays flat and positive
// for the 1x2 rectangle.
Outcome criterion_2() {
  std::vector<double> disk;
  double disk_e1 = 0.0;
  for (double d : {0.08, 0.04, 0.02}) {
    const CrossSectionDomain dom = build_domain(ShapeSpec::disk(1.0), d);
    const TransverseOperator top = build_transverse_operator(dom);
    const GroundPair g = dirichlet_ground_pair(dom, top);
    disk.push_back(compute_lambda(dom, top, g).lambda);
    disk_e1 = g.E1;
  }
  const bool disk_ok = disk[2] <= 0.02 * disk_e1 && disk[1] <= disk[0] / 3.0 &&
                       disk[2] <= disk[1] / 3.0;

  std::vector<double> rect;
  for (double d : {0.04, 0.02, 0.01}) {
    const CrossSectionDomain dom = build_domain(ShapeSpec::rectangle(1.0, 2.0), d);
    const TransverseOperator top = build_transverse_operator(dom);
    const GroundPair g = dirichlet_ground_pair(dom, top);
    rect.push_back(compute_lambda(dom, top, g).lambda);
  }
  const double lo = std::min({rect[0], rect[1], rect[2]});
  const double hi = std::max({rect[0], rect[1], rect[2]});
  const bool rect_ok = lo > 0.0 && (hi - lo) < 0.05 * lo;

  return {disk_ok && rect_ok,
          "disk " + num(disk[0]) + " -> " + num(disk[1]) + " -> " + num(disk[2]) +
              "  rect " + num(rect[0]) + " / " + num(rect[1]) + " / " + num(rect[2])};
}

CurvatureProfile bent_twisted_profile(double delta_s) {
  return make_profile({cos2(0.0, 1.0, 0.5)}, {cos2(0.0, 0.8, 0.3)},
                      {cos2(0.0, 0.7, 1.0)}, -1.0, 1.0, delta_s);
}

// 3. Metric identities at random points of a bent twisted tube.
Outcome criterion_3() {
  const CurvatureProfile p = bent_twisted_profile(5e-3);
  std::mt19937_64 rng(0x3e7a11cULL);
  std::uniform_real_distribution<double> us(-1.0, 1.0), ut(-0.5, 0.5);

  double err_det = 0.0, err_inv = 0.0, min_eig = 1.0;
  const Eigen::Vector3d floor(0.0, 1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const MetricSample m = metric_at(p, us(rng), ut(rng), ut(rng));
    err_det = std::max(err_det, std::abs(m.det - m.h * m.h));
    err_inv = std::max(err_inv,
                       (m.G * m.Ginv - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    const Eigen::Matrix3d S = m.Ginv - Eigen::Matrix3d(floor.asDiagonal());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(S, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues()(0));
  }
  const bool ok = err_det <= 1e-12 && err_inv <= 1e-12 && min_eig >= -1e-12;
  return {ok, "|det-h^2| " + num(err_det) + "  |G Ginv - I| " + num(err_inv) +
                  "  min eig " + num(min_eig)};
}

// 4. Frame orthonormality defect and the displacement bound
// |e_i(s2) - e_i(s1)| <= 2 k_i min{|s2-s1|, |I|}.
Outcome criterion_4() {
  const CurvatureProfile p = bent_twisted_profile(1e-3);
  const FrameField f = integrate_frame(p);
  const InjectivityReport rep = check_injectivity(p, 0.0);
  const double len = p.length();

  std::mt19937_64 rng(0xf4a3eULL);
  std::uniform_int_distribution<std::size_t> pick(0, f.s.size() - 1);
  double worst = -1.0;
  bool bound_ok = true;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t i = pick(rng), j = pick(rng);
    const double cap = std::min(std::abs(f.s[j] - f.s[i]), len);
    const double rate[3] = {rep.k1, rep.k2, rep.k3};
    const Eigen::Vector3d d[3] = {f.e1[j] - f.e1[i], f.e2[j] - f.e2[i],
                                  f.e3[j] - f.e3[i]};
    for (int c = 0; c < 3; ++c) {
      const double slack = 2.0 * rate[c] * cap + 1e-9 - d[c].norm();
      if (slack < 0.0) bound_ok = false;
      if (worst < 0.0 || slack < worst) worst = slack;
    }
  }
  const bool ok = f.max_gram_defect <= 1e-8 && bound_ok;
  return {ok, "gram defect " + num(f.max_gram_defect) + "  min displacement slack " +
                  num(worst)};
}

struct HardyRun {
  double mu = 0.0;
  double bound = 0.0;
  bool meets = false;
};

// The twist bump must blanket the effective support of the weight
// 1/(1+s^2) (90% of its mass sits inside |s| <= 6.3); narrower bumps leave
// a mu(L) = mu_inf + c/L transient that never stabilizes between L = 15
// and L = 30.
HardyRun weighted_minimum(const ShapeSpec& shape, double L, bool with_bound) {
  const TubeGrid g = make_tube_grid(shape, 0.05, L, 0.05);
  const CurvatureProfile p =
      make_profile({}, {}, {cos2(0.0, 9.0, 1.0)}, -9.5, 9.5, 5e-3);
  const SymmetricForm form = assemble_q(g, p);
  HardyRun r;
  if (with_bound) {
    const LambdaResult lam = compute_lambda(g.dom, g.top, g.ground);
    const SigmaDecomposition d = decompose_sigma(p);
    const HardyLedger led = global_hardy_bound(d, g.dom.a, lam.lambda);
    const HardyVerification v = verify_hardy(form, form.E1, led.s0, led.c_h);
    r.mu = v.mu_star;
    r.bound = led.c_h;
    r.meets = v.meets_bound;
  } else {
    const HardyVerification v = verify_hardy(form, form.E1, 0.0);
    r.mu = v.mu_star;
  }
  return r;
}

// 5. Weighted spectral minimum on the twisted 1x2 rectangle: positive,
// stable in L, and above the certified closed-form bound.
Outcome criterion_5() {
  const HardyRun a = weighted_minimum(ShapeSpec::rectangle(1.0, 2.0), 15.0, true);
  const HardyRun b = weighted_minimum(ShapeSpec::rectangle(1.0, 2.0), 30.0, true);
  const double change = std::abs(b.mu - a.mu) / a.mu;
  const bool ok = a.mu > 0.0 && change < 0.05 && a.meets && b.meets;
  return {ok, "mu(15) " + num(a.mu) + "  mu(30) " + num(b.mu) + "  change " + num(change) +
                  "  bound " + num(a.bound)};
}

// 6. Same twist on the unit disk: the weighted minimum collapses with L
// instead of stabilizing.
Outcome criterion_6() {
  const double E1 = ground_energy(ShapeSpec::disk(1.0), 0.05);
  const HardyRun a = weighted_minimum(ShapeSpec::disk(1.0), 15.0, false);
  const HardyRun b = weighted_minimum(ShapeSpec::disk(1.0), 30.0, false);
  const bool ok = a.mu <= 0.01 * E1 && b.mu < a.mu;
  return {ok, "mu(15) " + num(a.mu) + "  mu(30) " + num(b.mu) + "  cap " + num(0.01 * E1)};
}

// 7. Compensated-frame bends: spectrum below threshold at every listed
// strength, stable between L = 20 and L = 40.
Outcome criterion_7() {
  std::string detail;
  bool all_below = true, all_stable = true;
  for (double amp : {0.05, 0.1, 0.2}) {
    double mu[2] = {0.0, 0.0};
    bool below[2] = {false, false};
    int idx = 0;
    for (double L : {20.0, 40.0}) {
      const TubeGrid g = make_tube_grid(ShapeSpec::rectangle(1.0, 2.0), 0.1, L, 0.1);
      const CurvatureProfile p =
          make_profile({cos2(0.0, 1.0, amp)}, {}, {}, -1.0, 1.0, 5e-3);
      const SymmetricForm form = assemble_q(g, p);
      const SpectralResult res = eigenvalues_below_threshold(form, form.E1, 2);
      below[idx] = !res.below.empty();
      mu[idx] = below[idx] ? res.below.front() : res.smallest;
      ++idx;
    }
    if (!(below[0] && below[1])) all_below = false;
    if (std::abs(mu[1] - mu[0]) >= 1e-5) all_stable = false;
    detail += "k" + num(amp) + " below " + std::to_string(below[0]) +
              std::to_string(below[1]) + " dmu " + num(std::abs(mu[1] - mu[0])) + "  ";
  }
  const bool ok = all_below && all_stable;
  if (!ok)
    detail += "[Dirichlet truncation floor (pi/2L)^2 = " +
              num(std::pow(std::numbers::pi / 40.0, 2)) +
              " at L=20 hides binding this weak]";
  return {ok, detail};
}

// 8. Torsion-compensating twist guard: no spectrum below threshold up to the
// certified epsilon, measured onset above it.
Outcome criterion_8() {
  std::string detail;
  bool ok = true;
  for (double L : {20.0, 40.0}) {
    const TubeGrid g = make_tube_grid(ShapeSpec::rectangle(1.0, 2.0), 0.1, L, 0.1);
    const CurvatureProfile base =
        make_profile({cos2(0.0, 1.0, 1.0)}, {cos2(0.0, 0.8, 1.0)}, {}, -1.0, 1.0, 5e-3);
    const CurvatureProfile straight =
        make_profile({}, {cos2(0.0, 0.8, 1.0)}, {}, -1.0, 1.0, 5e-3);

    const LambdaResult lam = compute_lambda(g.dom, g.top, g.ground);
    const SigmaDecomposition d = decompose_sigma(straight);
    const HardyLedger led = global_hardy_bound(d, g.dom.a, lam.lambda);

    const ShapeNorms norms = shape_norms(base);
    double coupling = 0.0;
    for (double x = -1.0; x <= 1.0; x += 1e-3)
      coupling = std::max(coupling, std::abs(straight.kappa2_at(x)));
    ThresholdLedger tl =
        constants_ledger(TwistStabilityMode::effective_twist, g.dom.a, coupling, 0.0);
    const EpsilonThreshold eth =
        epsilon_threshold(tl, led.c_h, g.ground.E1, {-1.0, 1.0}, led.s0,
                          norms.kappa1 / norms.sum_effective());

    const double u = norms.sum_effective();
    BendSweepConfig cfg;
    cfg.k_values = {0.5 * eth.epsilon, eth.epsilon, 0.05 * u, 0.1 * u,
                    0.2 * u,           0.5 * u,     0.7 * u,  0.85 * u};
    cfg.n_eigs = 2;
    cfg.epsilon = eth.epsilon;
    const SweepResult sweep = bend_sweep(g, base, cfg);

    const bool onset_ok = sweep.k_c < 0.0 || sweep.k_c >= eth.epsilon;
    if (!(sweep.conservative && onset_ok)) ok = false;
    detail += "L" + num(L) + " eps " + num(eth.epsilon) + " k_c " + num(sweep.k_c) + "  ";
  }
  return {ok, detail};
}

// 9. Second guard mode: torsion scales with the bend while the twist stays
// fixed; still nothing below threshold up to epsilon.
Outcome criterion_9() {
  const TubeGrid g = make_tube_grid(ShapeSpec::rectangle(1.0, 2.0), 0.1, 20.0, 0.1);
  const CurvatureProfile base =
      make_profile({cos2(0.0, 1.0, 1.0)}, {cos2(0.0, 0.8, 0.5)},
                   {cos2(0.0, 0.8, 2.0)}, -1.0, 1.0, 5e-3);
  const CurvatureProfile straight =
      make_profile({}, {}, {cos2(0.0, 0.8, 2.0)}, -1.0, 1.0, 5e-3);

  const LambdaResult lam = compute_lambda(g.dom, g.top, g.ground);
  const SigmaDecomposition d = decompose_sigma(straight);
  const HardyLedger led = global_hardy_bound(d, g.dom.a, lam.lambda);

  const ShapeNorms norms = shape_norms(base);
  ThresholdLedger tl =
      constants_ledger(TwistStabilityMode::pure_twist, g.dom.a, norms.kappa2, 2.0);
  const EpsilonThreshold eth = epsilon_threshold(tl, led.c_h, g.ground.E1, {-1.0, 1.0},
                                                 led.s0, norms.kappa1 / norms.sum_pure());

  BendSweepConfig cfg;
  cfg.k_values = {0.5 * eth.epsilon, eth.epsilon, 0.3, 0.9, 1.8, 2.6};
  cfg.n_eigs = 2;
  cfg.epsilon = eth.epsilon;
  cfg.mode = TwistStabilityMode::pure_twist;
  const SweepResult sweep = bend_sweep(g, base, cfg);

  bool guarded = true;
  for (const SweepRow& row : sweep.rows)
    if (row.k <= eth.epsilon && (!row.solved || row.below)) guarded = false;
  const bool ok = guarded && sweep.conservative;
  return {ok, "eps " + num(eth.epsilon) + " k_c " + num(sweep.k_c) + " conservative " +
                  std::to_string(sweep.conservative)};
}

long double max3l(long double a, long double b, long double c) {
  return std::max(a, std::max(b, c));
}

// 10. Constants audit against fresh long-double evaluations, plus the
// randomized embedding-constant falsification.
Outcome criterion_10() {
  std::mt19937_64 rng(0xacce97edULL);
  std::uniform_real_distribution<double> ua(0.0, 2.0), un(0.0, 3.0), u01(0.01, 0.99);

  auto close = [](double got, long double ref) {
    const long double scale = std::max<long double>(1.0L, std::abs(ref));
    return std::abs((long double)got - ref) <= 1e-14L * scale;
  };

  bool cs_ok = true;
  for (int i = 0; i < 100; ++i) {
    const bool pure = i % 2 == 1;
    const double a = ua(rng);
    double cn = un(rng), tn = un(rng);
    if (pure && a > 0.0) cn = std::min(cn, 0.99 / a);
    const ThresholdLedger led =
        constants_ledger(pure ? TwistStabilityMode::pure_twist
                              : TwistStabilityMode::effective_twist,
                         a, cn, tn);
    const long double al = a, cl = cn, tl = tn;
    const long double C1 = pure ? 6.0L * al * (1.0L + al * cl + al * tl) *
                                      (1.0L + al * cl + al * tl)
                                : 6.0L * al * (1.0L + al * cl) * (1.0L + al * cl);
    const long double C2 = 1.0L + al * (1.0L + tl);
    const long double C3 = pure ? std::max(2.0L, 1.0L + 2.0L * al * al * tl * tl)
                                : 1.0L + al * cl + al * al * cl * cl;
    const long double C4 = 3.0L * C1 * C3;
    const long double C5 = C2 * std::sqrt(3.0L * C3 * (1.0L + C4));
    const long double C6 = 1.0L + C4;
    const long double C7 = 2.0L * C5 * C5;
    if (!(close(led.C1, C1) && close(led.C2, C2) && close(led.C3, C3) &&
          close(led.C4, C4) && close(led.C5, C5) && close(led.C6, C6) &&
          close(led.C7, C7)))
      cs_ok = false;
  }

  bool gamma_ok = true;
  std::uniform_real_distribution<double> usup(0.2, 3.0), uds(0.0, 4.0), ub(18.0, 200.0),
      ul(0.05, 2.0);
  for (int i = 0; i < 100; ++i) {
    SigmaDecomposition d;
    SigmaComponent c;
    c.A = {-1.0, 1.0};
    c.B = c.A;
    c.Aprime = {-0.3, 0.3};
    c.sup_sigma = usup(rng);
    c.sup_dsigma = uds(rng);
    c.sigma0 = 0.5 * c.sup_sigma;
    c.embedding_c = ub(rng);
    d.components.push_back(c);
    d.sup_sigma = c.sup_sigma * 1.25;
    const double a = 0.1 + ua(rng), lambda = ul(rng), alpha = u01(rng), beta = u01(rng);

    const MixedTermConstants m = mixed_term_gamma(d, 0, a, lambda, alpha, beta);
    const long double c1 = (long double)c.sup_sigma * c.sup_sigma * a * a;
    const long double c2 = (long double)c.sup_dsigma * c.sup_dsigma * a * a;
    const long double c3 =
        c2 == 0.0L ? 0.0L
                   : c2 * c.embedding_c / ((long double)lambda * c.sigma0 * c.sigma0);
    const long double gt = max3l(std::sqrt(c3) * d.sup_sigma, c3 / (2.0L * beta),
                                 c3 * lambda * c.sigma0 * c.sigma0 / alpha);
    const long double gm = gt + 2.0L * c1 / alpha;
    if (!(close(m.c1, c1) && close(m.c2, c2) && close(m.c3, c3) &&
          close(m.gamma_tilde, gt) && close(m.gamma, gm)))
      gamma_ok = false;

    const LocalHardyCoefficient lc = local_hardy_coefficient(d, 0, a, lambda);
    long double best = 0.0L;
    for (int k = 1; k <= 97; ++k) {
      const double bk = double(k) / 98.0;
      const long double c3k = c3;  // beta-independent
      const long double gtk = max3l(std::sqrt(c3k) * d.sup_sigma, c3k / (2.0L * bk),
                                    c3k * lambda * c.sigma0 * c.sigma0 / 1.0L);
      const long double gmk = std::max(0.5L, gtk + 2.0L * c1 / 1.0L);
      const long double ajk = 0.5L * std::min((long double)1.0L /
                                                  ((long double)c.sup_sigma * c.sup_sigma),
                                              (1.0L - bk) / gmk);
      if (ajk > best) best = ajk;
    }
    if (!close(lc.a_j, best)) gamma_ok = false;
  }

  bool embedding_ok = true;
  std::uniform_real_distribution<double> uc(-2.0, 2.0), uw(0.5, 3.0), uf(0.1, 0.8);
  double min_margin = 1e300;
  for (int i = 0; i < 3; ++i) {
    const double c0 = uc(rng), w = uw(rng);
    const Interval big{c0 - w, c0 + w};
    const double f = uf(rng);
    const Interval sub{c0 - f * w, c0 + f * w};
    const EmbeddingCheck bc = embedding_inequality_check(big, sub, 1000);
    min_margin = std::min(min_margin, bc.margin);
    if (!(bc.max_ratio <= bc.c)) embedding_ok = false;
  }

  return {cs_ok && gamma_ok && embedding_ok,
          std::string("constants ") + (cs_ok ? "ok" : "MISMATCH") + "  gamma/a_j " +
              (gamma_ok ? "ok" : "MISMATCH") + "  falsification margin " +
              num(min_margin)};
}

// 11. Scaling control: on a twist-invariant direction the local form value
// ignores the twist amplitude while the weighted right side grows, so the
// certified coefficient must decay quadratically.
Outcome criterion_11() {
  const TubeGrid g = make_tube_grid(ShapeSpec::rectangle(0.5, 0.5), 0.1, 4.0, 0.2);
  const Eigen::VectorXd f = dtau_kernel_vector(g.dom, g.top);
  if ((g.top.d_tau * f).norm() > 1e-10)
    return {false, "no twist-invariant direction found"};

  Eigen::VectorXd psi(g.dof());
  for (int k = 0; k < g.n_s; ++k) {
    const double x = g.s[std::size_t(k)] / 0.8;
    double gk = 0.0;
    if (std::abs(x) < 1.0) {
      const double c = std::cos(0.5 * kPi * x);
      gk = c * c;
    }
    psi.segment(long(k) * g.top.n, g.top.n) = gk * f;
  }

  auto bump1 = [](double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double c = std::cos(0.5 * kPi * s);
    return c * c;
  };
  auto dbump1 = [](double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    return -0.5 * kPi * std::sin(kPi * s);
  };

  const Interval everything{-g.L - 1.0, g.L + 1.0};
  std::vector<double> lhs, rhs, aj;
  for (double n : {1.0, 2.0, 4.0, 8.0}) {
    auto sig = [n, bump1](double s) { return n * bump1(s); };
    auto dsig = [n, dbump1](double s) { return n * dbump1(s); };
    lhs.push_back(local_hardy_margin(g, sig, -1, everything, 0.0, 0.0, psi));
    double r = 0.0;
    for (int k = 0; k < g.n_s; ++k) {
      const double sk = sig(g.s[std::size_t(k)]);
      r += sk * sk * psi.segment(long(k) * g.top.n, g.top.n).squaredNorm();
    }
    rhs.push_back(r);
    const SigmaDecomposition d = decompose_sigma(sig, dsig, -g.L, g.L, g.delta_s);
    aj.push_back(local_hardy_coefficient(d, 0, g.dom.a, 0.1).a_j);
  }

  bool lhs_ok = true, rhs_ok = true, decay_ok = true;
  double spread = 0.0;
  for (std::size_t i = 1; i < lhs.size(); ++i) {
    spread = std::max(spread, std::abs(lhs[i] - lhs[0]) / std::abs(lhs[0]));
    if (std::abs(lhs[i] - lhs[0]) > 1e-10 * std::abs(lhs[0])) lhs_ok = false;
    if (std::abs(rhs[i] / rhs[i - 1] - 4.0) > 1e-12 * 4.0) rhs_ok = false;
  }
  const double scale[4] = {1.0, 2.0, 4.0, 8.0};
  for (std::size_t i = 0; i < aj.size(); ++i)
    if (aj[i] > 0.5 / (scale[i] * scale[i]) + 1e-15) decay_ok = false;

  return {lhs_ok && rhs_ok && decay_ok,
          "form spread " + num(spread) + "  weight growth x4 " +
              (rhs_ok ? "ok" : "BROKEN") + "  coefficient decay " +
              (decay_ok ? "ok" : "BROKEN")};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"transverse ground energies", criterion_1},
      {"asymmetry dichotomy", criterion_2},
      {"metric identities", criterion_3},
      {"frame fidelity", criterion_4},
      {"weighted bound, twisted rectangle", criterion_5},
      {"weighted collapse, disk control", criterion_6},
      {"bend instability, compensated frame", criterion_7},
      {"twist guard, fixed torsion", criterion_8},
      {"twist guard, scaled torsion", criterion_9},
      {"constants audit", criterion_10},
      {"twist-invariant scaling control", criterion_11},
  };

  int failures = 0;
  int idx = 0;
  for (const Entry& e : entries) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2d %-36s %s  %7.1fs  %s\n", idx, e.name,
                o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures;
}
