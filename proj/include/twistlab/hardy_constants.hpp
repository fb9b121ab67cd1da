#pragma once

// Explicit constants behind the twisted-tube Hardy inequality, and numerical
// verification of the inequalities they certify.  The chain is
//
//   embedding constant c(Lambda, Lambda')          [interval_embedding_constant]
//   -> mixed-term constants c1, c2, c3, gamma      [mixed_term_gamma]
//   -> local coefficient a_j per support component [local_hardy_coefficient]
//   -> global weighted bound c_h                   [global_hardy_bound]
//
// and verify_hardy / verify_local_hardy measure the actual discrete spectral
// quantities the bounds undercut.  Everything here concerns the straight
// twisted form; sigma is the effective twist rate.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <string>
#include <vector>

#include "twistlab/curve_geometry.hpp"
#include "twistlab/eigensolve.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/transverse.hpp"
#include "twistlab/waveguide_operators.hpp"

namespace twistlab {

struct Interval {
  double lo = 0.0, hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Embedding constant: ||f||^2 on Lambda is controlled by ||f||^2 on a
// subinterval plus ||f'||^2, at the price of c(Lambda, Lambda').
inline double interval_embedding_constant(const Interval& big, const Interval& sub) {
  if (!(sub.length() > 0.0))
    throw ConfigError("interval_embedding_constant: inner interval must have positive length");
  if (sub.lo < big.lo - 1e-12 || sub.hi > big.hi + 1e-12)
    throw ConfigError("interval_embedding_constant: inner interval must lie inside the outer one");
  const double r = big.length() / sub.length();
  return std::max(2.0 + 16.0 * r * r, 4.0 * big.length() * big.length());
}

struct EmbeddingCheck {
  double c = 0.0;
  double max_ratio = 0.0;
  double margin = 0.0;  // c - max_ratio, must stay positive
  int trials = 0;
};

// Randomized falsification of the embedding inequality: piecewise-linear and
// Fourier trial functions, closed-form derivatives, trapezoid quadrature.
inline EmbeddingCheck embedding_inequality_check(const Interval& big, const Interval& sub,
                                           int trials = 1000,
                                           std::uint64_t seed = 0x5eedb1d5ULL) {
  if (trials < 1) throw ConfigError("embedding_inequality_check: need at least one trial");
  EmbeddingCheck out;
  out.c = interval_embedding_constant(big, sub);
  out.trials = trials;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int kKnots = 9, kModes = 8, kGrid = 800;
  std::vector<double> knots(kKnots), coef(kModes + 1);

  auto sq_integrals = [&](auto&& f, auto&& df) {
    // trapezoid of f^2 over both intervals and df^2 over the big one
    double f2_big = 0.0, f2_sub = 0.0, df2 = 0.0;
    const double hb = big.length() / kGrid;
    for (int i = 0; i <= kGrid; ++i) {
      const double x = big.lo + i * hb;
      const double w = (i == 0 || i == kGrid) ? 0.5 : 1.0;
      f2_big += w * f(x) * f(x) * hb;
      df2 += w * df(x) * df(x) * hb;
    }
    const double hs = sub.length() / kGrid;
    for (int i = 0; i <= kGrid; ++i) {
      const double x = sub.lo + i * hs;
      const double w = (i == 0 || i == kGrid) ? 0.5 : 1.0;
      f2_sub += w * f(x) * f(x) * hs;
    }
    return f2_big / (f2_sub + df2);
  };

  for (int t = 0; t < trials; ++t) {
    double ratio;
    if (t % 2 == 0) {
      for (double& k : knots) k = u(rng);
      const double h = big.length() / (kKnots - 1);
      auto f = [&](double x) {
        double p = std::clamp((x - big.lo) / h, 0.0, double(kKnots - 1));
        const int i = std::min(int(p), kKnots - 2);
        return knots[i] + (p - i) * (knots[i + 1] - knots[i]);
      };
      auto df = [&](double x) {
        double p = std::clamp((x - big.lo) / h, 0.0, double(kKnots - 1));
        const int i = std::min(int(p), kKnots - 2);
        return (knots[i + 1] - knots[i]) / h;
      };
      ratio = sq_integrals(f, df);
    } else {
      for (double& a : coef) a = u(rng);
      const double w0 = std::numbers::pi / big.length();
      auto f = [&](double x) {
        double v = coef[0];
        for (int m = 1; m <= kModes; ++m) v += coef[m] * std::cos(m * w0 * (x - big.lo));
        return v;
      };
      auto df = [&](double x) {
        double v = 0.0;
        for (int m = 1; m <= kModes; ++m)
          v -= coef[m] * m * w0 * std::sin(m * w0 * (x - big.lo));
        return v;
      };
      ratio = sq_integrals(f, df);
    }
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  out.margin = out.c - out.max_ratio;
  return out;
}

// One connected component A_j of the effective-twist support, with all the
// quantities the constants consume.
struct SigmaComponent {
  Interval A;          // closed support component
  Interval B;          // its open hull (inf A, sup A)
  Interval Aprime;     // level-set subinterval where |sigma| >= sigma0
  double sigma0 = 0.0;
  double sup_sigma = 0.0;   // over A
  double sup_dsigma = 0.0;  // over A
  double embedding_c = 0.0;      // c(B, Aprime)
};

struct SigmaWindow {
  double s0 = 0.0;
  double b = 0.0;          // J = [s0 - b, s0 + b]
  double min_abs = 0.0;    // min |sigma| over J
  int component = -1;
};

struct SigmaDecomposition {
  double s_a = 0.0, s_b = 0.0, delta_s = 0.0;
  std::vector<double> s, sigma;
  double sup_sigma = 0.0;
  double zero_threshold = 0.0;
  double support_measure = 0.0;  // (#samples above threshold) * delta_s
  std::vector<SigmaComponent> components;
  SigmaWindow window;  // default choice, centered at the |sigma| maximizer
  std::function<double(double)> sigma_fn, dsigma_fn;

  int component_containing(double x) const {
    for (std::size_t j = 0; j < components.size(); ++j)
      if (components[j].A.contains(x)) return int(j);
    return -1;
  }
};

namespace detail {

// sup over samples and midpoints of a run [i0, i1]
inline double run_sup(const std::function<double(double)>& fn, const std::vector<double>& s,
                      int i0, int i1) {
  double m = 0.0;
  for (int i = i0; i <= i1; ++i) {
    m = std::max(m, std::abs(fn(s[std::size_t(i)])));
    if (i < i1) m = std::max(m, std::abs(fn(0.5 * (s[std::size_t(i)] + s[std::size_t(i) + 1]))));
  }
  return m;
}

inline SigmaWindow window_at(const SigmaDecomposition& d, double s0) {
  SigmaWindow w;
  w.s0 = s0;
  w.component = d.component_containing(s0);
  if (w.component < 0 || !(std::abs(d.sigma_fn(s0)) > d.zero_threshold))
    throw ConfigError("hardy window: sigma vanishes at s0 = " + std::to_string(s0));
  const Interval& A = d.components[std::size_t(w.component)].A;
  w.b = std::min(s0 - A.lo, A.hi - s0);
  if (!(w.b > 0.0)) w.b = 0.5 * d.delta_s;
  w.min_abs = std::abs(d.sigma_fn(s0));
  const int probes = std::max(8, int(std::ceil(2.0 * w.b / d.delta_s)) * 2);
  for (int i = 0; i <= probes; ++i)
    w.min_abs = std::min(w.min_abs, std::abs(d.sigma_fn(s0 - w.b + 2.0 * w.b * i / probes)));
  return w;
}

}  // namespace detail

// Support decomposition of the effective twist rate: components are closures
// of connected runs of |sigma| above a relative zero threshold; per component
// the level sets {|sigma| >= c sup} for c in {1/4, 1/2, 3/4} are scanned and
// the subinterval maximizing sigma0^2 / c(B, A') is kept.
inline SigmaDecomposition decompose_sigma(std::function<double(double)> sigma_fn,
                                          std::function<double(double)> dsigma_fn, double s_a,
                                          double s_b, double delta_s,
                                          double rel_zero = 1e-9) {
  if (!(s_b > s_a) || !(delta_s > 0.0))
    throw ConfigError("decompose_sigma: need s_b > s_a and delta_s > 0");
  SigmaDecomposition d;
  d.s_a = s_a;
  d.s_b = s_b;
  d.sigma_fn = std::move(sigma_fn);
  d.dsigma_fn = std::move(dsigma_fn);
  const int n = std::max(2, int(std::lround((s_b - s_a) / delta_s)) + 1);
  d.delta_s = (s_b - s_a) / (n - 1);
  d.s.resize(std::size_t(n));
  d.sigma.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    d.s[std::size_t(i)] = s_a + i * d.delta_s;
    d.sigma[std::size_t(i)] = d.sigma_fn(d.s[std::size_t(i)]);
    d.sup_sigma = std::max(d.sup_sigma, std::abs(d.sigma[std::size_t(i)]));
    if (i + 1 < n)
      d.sup_sigma = std::max(d.sup_sigma,
                             std::abs(d.sigma_fn(d.s[std::size_t(i)] + 0.5 * d.delta_s)));
  }
  d.zero_threshold = rel_zero * d.sup_sigma;
  if (d.sup_sigma == 0.0) return d;  // identically zero: no components

  int run_start = -1;
  int argmax = 0;
  for (int i = 0; i <= n; ++i) {
    const bool on = i < n && std::abs(d.sigma[std::size_t(i)]) > d.zero_threshold;
    if (on && run_start < 0) run_start = i;
    if (on && std::abs(d.sigma[std::size_t(i)]) > std::abs(d.sigma[std::size_t(argmax)]))
      argmax = i;
    if (!on && run_start >= 0) {
      const int i0 = run_start, i1 = i - 1;
      run_start = -1;
      d.support_measure += (i1 - i0 + 1) * d.delta_s;
      if (i1 == i0) continue;  // single sample: below grid resolution, skip
      SigmaComponent c;
      c.A = {d.s[std::size_t(i0)], d.s[std::size_t(i1)]};
      c.B = c.A;
      c.sup_sigma = detail::run_sup(d.sigma_fn, d.s, i0, i1);
      c.sup_dsigma = detail::run_sup(d.dsigma_fn, d.s, i0, i1);
      double best = -1.0;
      for (double frac : {0.25, 0.5, 0.75}) {
        const double level = frac * c.sup_sigma;
        // longest run of samples at or above the level
        int best0 = -1, best1 = -2, cur0 = -1;
        for (int k = i0; k <= i1 + 1; ++k) {
          const bool hi = k <= i1 && std::abs(d.sigma[std::size_t(k)]) >= level;
          if (hi && cur0 < 0) cur0 = k;
          if (!hi && cur0 >= 0) {
            if (k - 1 - cur0 > best1 - best0) { best0 = cur0; best1 = k - 1; }
            cur0 = -1;
          }
        }
        if (best0 < 0) continue;
        Interval ap;
        if (best1 > best0) {
          ap = {d.s[std::size_t(best0)], d.s[std::size_t(best1)]};
        } else {
          ap = {d.s[std::size_t(best0)] - 0.25 * d.delta_s,
                d.s[std::size_t(best0)] + 0.25 * d.delta_s};
          ap.lo = std::max(ap.lo, c.A.lo);
          ap.hi = std::min(ap.hi, c.A.hi);
          if (!(ap.length() > 0.0)) continue;
        }
        double s0v = std::numeric_limits<double>::infinity();
        for (int k = std::max(i0, best0); k <= std::min(i1, best1); ++k)
          s0v = std::min(s0v, std::abs(d.sigma[std::size_t(k)]));
        if (!std::isfinite(s0v)) s0v = level;
        const double cb = interval_embedding_constant(c.B, ap);
        if (s0v * s0v / cb > best) {
          best = s0v * s0v / cb;
          c.Aprime = ap;
          c.sigma0 = s0v;
          c.embedding_c = cb;
        }
      }
      if (best > 0.0) d.components.push_back(c);
    }
  }
  if (!d.components.empty()) {
    if (d.component_containing(d.s[std::size_t(argmax)]) < 0) {
      // maximizer fell in a sub-resolution run; take the best covered sample
      double top = -1.0;
      for (int i = 0; i < n; ++i)
        if (d.component_containing(d.s[std::size_t(i)]) >= 0 &&
            std::abs(d.sigma[std::size_t(i)]) > top) {
          top = std::abs(d.sigma[std::size_t(i)]);
          argmax = i;
        }
    }
    d.window = detail::window_at(d, d.s[std::size_t(argmax)]);
  }
  return d;
}

// sigma = theta_dot - kappa2 for a curvature profile (the sign convention is
// spectrally irrelevant; constants only see |sigma|).
inline SigmaDecomposition decompose_sigma(const CurvatureProfile& p, double rel_zero = 1e-9) {
  return decompose_sigma([p](double x) { return p.theta_dot_at(x) - p.kappa2_at(x); },
                         [p](double x) { return p.theta_ddot_at(x) - p.dkappa2_at(x); },
                         p.s_a, p.s_b, p.delta_s, rel_zero);
}

struct MixedTermConstants {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double gamma_tilde = 0.0;
  double gamma = 0.0;
};

// Constants controlling the cross term between the longitudinal and the
// angular derivative on component j.
inline MixedTermConstants mixed_term_gamma(const SigmaDecomposition& d, int j, double a,
                                           double lambda, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw ConfigError("mixed_term_gamma: alpha and beta must be positive");
  if (!(lambda > 0.0))
    throw ConfigError(
        "mixed_term_gamma: lambda = 0 (rotationally invariant cross-section): "
        "the Hardy machinery is unavailable");
  if (j < 0 || j >= int(d.components.size()))
    throw ConfigError("mixed_term_gamma: no such support component");
  const SigmaComponent& c = d.components[std::size_t(j)];
  MixedTermConstants m;
  m.c1 = c.sup_sigma * c.sup_sigma * a * a;
  m.c2 = c.sup_dsigma * c.sup_dsigma * a * a;
  m.c3 = m.c2 == 0.0 ? 0.0 : m.c2 * c.embedding_c / (lambda * c.sigma0 * c.sigma0);
  m.gamma_tilde = std::max({std::sqrt(m.c3) * d.sup_sigma, m.c3 / (2.0 * beta),
                            m.c3 * lambda * c.sigma0 * c.sigma0 / alpha});
  m.gamma = m.gamma_tilde + 2.0 * m.c1 / alpha;
  return m;
}

inline double local_hardy_formula(double sup_sigma_j, double beta, double gamma_beta_j) {
  return 0.5 * std::min(1.0 / (sup_sigma_j * sup_sigma_j), (1.0 - beta) / gamma_beta_j);
}

struct LocalHardyCoefficient {
  double a_j = 0.0;
  double beta_star = 0.0;
  double gamma_beta = 0.0;  // max{1/2, gamma_{1,beta*}}
};

// a_j maximized over a beta grid in (0,1); the cross-term constant is
// evaluated at alpha = 1 as the local inequality requires.
inline LocalHardyCoefficient local_hardy_coefficient(const SigmaDecomposition& d, int j,
                                                     double a, double lambda,
                                                     int beta_points = 97) {
  LocalHardyCoefficient best;
  for (int i = 1; i <= beta_points; ++i) {
    const double beta = double(i) / (beta_points + 1);
    const double g = std::max(0.5, mixed_term_gamma(d, j, a, lambda, 1.0, beta).gamma);
    const double aj = local_hardy_formula(d.components[std::size_t(j)].sup_sigma, beta, g);
    if (aj > best.a_j) {
      best.a_j = aj;
      best.beta_star = beta;
      best.gamma_beta = g;
    }
  }
  return best;
}

// Printed lower bound for the global weighted constant; min_J_sigma enters
// squared.  The prose variant with the first power is exposed separately.
inline double global_hardy_formula(double b, double c0, double lambda, double min_J_sigma,
                                   double gamma_alpha, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("global_hardy_formula: alpha must lie in (0,1)");
  if (!(b > 0.0) || !(c0 > 0.0) || !(lambda > 0.0) || !(min_J_sigma > 0.0)) return 0.0;
  const double den = (16.0 + 2.0 * b * b) / (b * b * c0 * lambda * min_J_sigma * min_J_sigma) +
                     16.0 * (gamma_alpha / (1.0 - alpha) + 1.0);
  return 1.0 / den;
}

struct HardyLedger {
  double a = 0.0, lambda = 0.0;
  int j_star = -1;
  double s0 = 0.0, b = 0.0, alpha = 0.0;
  double min_J_sigma = 0.0;
  MixedTermConstants mixed;   // at (alpha*, beta = 1) on component j*
  double gamma_alpha = 0.0;   // max{1, gamma_{alpha*,1}}
  LocalHardyCoefficient local;  // c0 identification
  double c0 = 0.0;
  double c_h = 0.0;        // optimized printed bound
  double c_h_prose = 0.0;  // first-power variant at the same parameters
  std::vector<double> a_all;  // a_j for every component
};

// Global weighted Hardy bound with the weight centered at s0 (default: the
// |sigma| maximizer); optimizes alpha over a grid and the window half-width
// over dyadic subdivisions.  c0 is identified with the local coefficient of
// the component containing the window.
inline HardyLedger global_hardy_bound(
    const SigmaDecomposition& d, double a, double lambda,
    double s0 = std::numeric_limits<double>::quiet_NaN()) {
  if (!(lambda > 0.0))
    throw ConfigError(
        "global_hardy_bound: lambda = 0 (rotationally invariant cross-section): "
        "no Hardy bound");
  if (d.components.empty())
    throw ConfigError("global_hardy_bound: sigma vanishes identically");

  HardyLedger L;
  L.a = a;
  L.lambda = lambda;
  const SigmaWindow base = std::isnan(s0) ? d.window : detail::window_at(d, s0);
  L.j_star = base.component;
  L.s0 = base.s0;
  L.local = local_hardy_coefficient(d, L.j_star, a, lambda);
  L.c0 = L.local.a_j;
  for (std::size_t j = 0; j < d.components.size(); ++j)
    L.a_all.push_back(local_hardy_coefficient(d, int(j), a, lambda).a_j);

  double best = -1.0;
  for (int ai = 2; ai <= 18; ++ai) {
    const double alpha = 0.05 * ai;  // 0.10 .. 0.90
    const double g1 = mixed_term_gamma(d, L.j_star, a, lambda, alpha, 1.0).gamma;
    const double ga = std::max(1.0, g1);
    for (int div = 1; div <= 8; div *= 2) {
      const double b = base.b / div;
      double mj = std::abs(d.sigma_fn(base.s0));
      const int probes = 64;
      for (int i = 0; i <= probes; ++i)
        mj = std::min(mj, std::abs(d.sigma_fn(base.s0 - b + 2.0 * b * i / probes)));
      const double ch = global_hardy_formula(b, L.c0, lambda, mj, ga, alpha);
      if (ch > best) {
        best = ch;
        L.alpha = alpha;
        L.b = b;
        L.min_J_sigma = mj;
        L.gamma_alpha = ga;
        L.c_h = ch;
      }
    }
  }
  L.mixed = mixed_term_gamma(d, L.j_star, a, lambda, L.alpha, 1.0);
  const double den_prose =
      (16.0 + 2.0 * L.b * L.b) / (L.b * L.b * L.c0 * lambda * L.min_J_sigma) +
      16.0 * (L.gamma_alpha / (1.0 - L.alpha) + 1.0);
  L.c_h_prose = 1.0 / den_prose;
  return L;
}

struct HardyVerification {
  double mu_star = 0.0;   // smallest eigenvalue of the weighted problem
  double residual = 0.0;  // whitened-operator residual of the reported pair
  int iterations = 0;
  double s0 = 0.0;
  double bound = -1.0;
  bool meets_bound = true;
  double sharpness = 0.0;  // mu_star / bound when a bound is supplied
};

// Measures mu* = min spec of (A - E1) psi = mu W psi with the Hardy weight
// W = 1/(1 + (s - s0)^2), via symmetric whitening by W^{-1/2}.
inline HardyVerification verify_hardy(const SymmetricForm& form, double E1, double s0,
                                      double c_h_bound = -1.0,
                                      const EigOptions& user_opt = {}) {
  const long n = form.A.rows();
  const int ns = form.n_s, nt = form.n_t;
  Eigen::VectorXd dslab(ns);
  for (int k = 0; k < ns; ++k) {
    const double s = -form.L + (k + 1) * form.delta_s;
    dslab(k) = std::sqrt(1.0 + (s - s0) * (s - s0));
  }
  Eigen::VectorXd dd(n);
  for (int k = 0; k < ns; ++k) dd.segment(long(k) * nt, nt).setConstant(dslab(k));

  HardyVerification out;
  out.s0 = s0;
  Eigen::VectorXd phi;
  if (n <= kDenseTubeCutoff) {
    Eigen::MatrixXd C = Eigen::MatrixXd(form.A);
    C.diagonal().array() -= E1;
    C = dd.asDiagonal() * C * dd.asDiagonal();
    EigResult r = dense_eigensolve(C);
    out.mu_star = r.values(0);
    phi = r.vectors.col(0);
    out.residual = (C * phi - out.mu_star * phi).norm();
  } else {
    if (!form.transverse_modes)
      throw SolverError("verify_hardy: missing transverse eigenbasis", {});
    TensorPreconditioner T{form.transverse_modes, form.transverse_energies, ns,
                           form.delta_s, E1};
    auto applyC = [&](const Eigen::MatrixXd& X) {
      Eigen::MatrixXd Y = dd.asDiagonal() * X;
      Eigen::MatrixXd Z = form.A * Y - E1 * Y;
      return (dd.asDiagonal() * Z).eval();
    };
    auto applyP = [&](const Eigen::MatrixXd& R) {
      Eigen::MatrixXd Y = dd.cwiseInverse().asDiagonal() * R;
      Eigen::MatrixXd Z = T(Y);
      return (dd.cwiseInverse().asDiagonal() * Z).eval();
    };
    // guesses: whitened 1-D box modes times the transverse ground state
    Eigen::MatrixXd C1(ns, ns);
    C1.setZero();
    const double w = 1.0 / (form.delta_s * form.delta_s);
    for (int k = 0; k < ns; ++k) {
      C1(k, k) = 2.0 * w * dslab(k) * dslab(k);
      if (k + 1 < ns) {
        C1(k, k + 1) = -w * dslab(k) * dslab(k + 1);
        C1(k + 1, k) = C1(k, k + 1);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C1);
    const int m = 4;
    Eigen::MatrixXd guess(n, m);
    for (int jcol = 0; jcol < m; ++jcol)
      for (int k = 0; k < ns; ++k)
        guess.block(long(k) * nt, jcol, nt, 1) = es.eigenvectors()(k, jcol) * form.j1;
    EigOptions opt = user_opt;
    opt.tol_abs = 1e-6;
    if (opt.value_tol <= 0.0) opt.value_tol = 1e-10;
    EigResult r = lobpcg_smallest(n, applyC, applyP, 1, opt, &guess);
    if (!r.converged)
      throw SolverError("verify_hardy: weighted eigensolver stalled at residual " +
                            std::to_string(r.residuals.maxCoeff()),
                        r.residual_history);
    out.mu_star = r.values(0);
    phi = r.vectors.col(0);
    out.iterations = r.iterations;
    out.residual = (applyC(phi) - out.mu_star * phi).norm();
  }
  if (c_h_bound >= 0.0) {
    out.bound = c_h_bound;
    out.meets_bound = out.mu_star >= c_h_bound - 1e-8;
    out.sharpness = c_h_bound > 0.0 ? out.mu_star / c_h_bound : 0.0;
  }
  return out;
}

// Quadratic form of the twisted-straight rows restricted to the strip
// A x omega, minus E1 and the weighted-sigma term: the local inequality
// margin for one trial vector.  Row convention matches assemble_l_sigma.
inline double local_hardy_margin(const TubeGrid& g,
                                 const std::function<double(double)>& sigma, int sign,
                                 const Interval& A, double coeff, double E1,
                                 const Eigen::VectorXd& psi) {
  const int nt = g.top.n, ns = g.n_s;
  const double inv_ds = 1.0 / g.delta_s;
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(nt);
  std::vector<Eigen::VectorXd> dtau(static_cast<std::size_t>(ns));
  std::vector<bool> have(std::size_t(ns), false);
  auto dtau_of = [&](int k) -> const Eigen::VectorXd& {
    if (k < 0 || k >= ns) return zero;
    if (!have[std::size_t(k)]) {
      dtau[std::size_t(k)] = g.top.d_tau * psi.segment(long(k) * nt, nt);
      have[std::size_t(k)] = true;
    }
    return dtau[std::size_t(k)];
  };

  double total = 0.0;
  for (int e = 0; e <= ns; ++e) {
    const double s_e = g.edge_s(e);
    if (!A.contains(s_e)) continue;
    const double c_e = double(sign) * sigma(s_e);
    const int kl = e - 1, kr = e;
    for (int i = 0; i < nt; ++i) {
      const double xl = kl >= 0 ? psi(long(kl) * nt + i) : 0.0;
      const double xr = kr < ns ? psi(long(kr) * nt + i) : 0.0;
      const double r = (xr - xl) * inv_ds + 0.5 * c_e * (dtau_of(kl)(i) + dtau_of(kr)(i));
      total += r * r;
    }
  }
  for (int k = 0; k < ns; ++k) {
    const double s_k = g.s[std::size_t(k)];
    if (!A.contains(s_k)) continue;
    const auto xk = psi.segment(long(k) * nt, nt);
    const double sig = sigma(s_k);
    total += xk.dot(g.top.laplace * xk) - (E1 + coeff * sig * sig) * xk.squaredNorm();
  }
  return total;
}

struct LocalHardyCheck {
  double min_margin = std::numeric_limits<double>::infinity();
  int worst_trial = -1;
  int trials = 0;
};

// Randomized + supplied-vector falsification of the local inequality on
// component j: margins are normalized by ||psi||^2 and must stay above a
// small negative floating-point slack.
inline LocalHardyCheck verify_local_hardy(const TubeGrid& g, const SigmaDecomposition& d,
                                          int j, double a_j, double lambda, double E1,
                                          int sign = -1, int n_random = 1000,
                                          std::uint64_t seed = 0x10ca1ULL,
                                          const Eigen::MatrixXd* extra = nullptr) {
  if (j < 0 || j >= int(d.components.size()))
    throw ConfigError("verify_local_hardy: no such support component");
  const Interval A = d.components[std::size_t(j)].A;
  const int nt = g.top.n, ns = g.n_s;
  auto sigma = [&d](double x) { return d.sigma_fn(x); };

  LocalHardyCheck out;
  auto consider = [&](const Eigen::VectorXd& psi, int id) {
    const double nrm2 = psi.squaredNorm();
    if (nrm2 == 0.0) return;
    const double m =
        local_hardy_margin(g, sigma, sign, A, a_j * lambda, E1, psi) / nrm2;
    ++out.trials;
    if (m < out.min_margin) {
      out.min_margin = m;
      out.worst_trial = id;
    }
  };

  if (extra)
    for (long c = 0; c < extra->cols(); ++c) consider(extra->col(c), -int(c) - 1);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd psi(g.dof()), gs(ns);
  for (int t = 0; t < n_random; ++t) {
    if (t % 3 == 0) {
      for (long i = 0; i < psi.size(); ++i) psi(i) = u(rng);
    } else if (t % 3 == 1) {
      for (int k = 0; k < ns; ++k) gs(k) = u(rng);
      for (int k = 0; k < ns; ++k) psi.segment(long(k) * nt, nt) = gs(k) * g.ground.j1;
    } else {
      // smooth longitudinal profile supported around the component
      const double mid = 0.5 * (A.lo + A.hi), half = 0.75 * A.length();
      double a1 = u(rng), a2 = u(rng), a3 = u(rng);
      for (int k = 0; k < ns; ++k) {
        const double x = (g.s[std::size_t(k)] - mid) / half;
        if (std::abs(x) >= 1.0) {
          gs(k) = 0.0;
        } else {
          const double window = std::cos(0.5 * std::numbers::pi * x);
          gs(k) = window * window *
                  (a1 + a2 * std::sin(std::numbers::pi * x) + a3 * std::cos(2.0 * std::numbers::pi * x));
        }
      }
      for (int k = 0; k < ns; ++k) psi.segment(long(k) * nt, nt) = gs(k) * g.ground.j1;
    }
    consider(psi, t);
  }
  return out;
}

// A transverse vector annihilated by the discrete angular derivative, built
// from the numerical kernel of d_tau (nonempty whenever the rotation axis
// hits a lattice node).  Used by the sigma-scaling check: for psi = g (x) f
// with f in ker(d_tau) the twisted form value is sigma-independent.
inline Eigen::VectorXd dtau_kernel_vector(const CrossSectionDomain& dom,
                                          const TransverseOperator& top,
                                          double rel_tol = 1e-11) {
  Eigen::MatrixXd D(top.d_tau);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
  int kdim = 0;
  for (int i = int(sv.size()) - 1; i >= 0 && sv(i) <= cut; --i) ++kdim;
  if (kdim == 0)
    throw DiscretizationError("dtau_kernel_vector: discrete angular derivative has no kernel");
  const Eigen::MatrixXd K = svd.matrixV().rightCols(kdim);
  // project a radial hump centered at the rotation axis onto the kernel
  double rmax = 0.0;
  for (const auto& p : dom.nodes) rmax = std::max(rmax, p.norm());
  Eigen::VectorXd hump(top.n);
  for (int m = 0; m < top.n; ++m) {
    const double r = dom.nodes[std::size_t(m)].norm() / (rmax + top.delta);
    const double c = std::cos(0.5 * std::numbers::pi * std::min(r, 1.0));
    hump(m) = c * c;
  }
  Eigen::VectorXd f = K * (K.transpose() * hump);
  if (f.norm() < 1e-10 * hump.norm()) f = K.col(K.cols() - 1);
  return f / f.norm();
}

}  // namespace twistlab
