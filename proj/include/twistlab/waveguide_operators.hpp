#pragma once

// Discrete quadratic forms on a truncated tube [-L, L] x omega and their
// low-lying spectra.  Both forms share one assembly core built from exact
// squares of first-order flux rows:
//
//   longitudinal rows, staggered between slabs k and k+1 at edge midpoints:
//       (x_{k+1} - x_k)/ds + c_e * avg(D_tau x) + (b_e/2)(x_k + x_{k+1}),
//   transverse rows inside each slab, on the 2-D edge/cut lists:
//       (x_nb - x_m)/d + (f/2)(x_m + x_nb),
//
// squared with per-row weights and summed.  The twisted-straight form uses
// c_e = -sign * sigma, b = f = 0, weight 1; the curved-tube form after the
// usual unitary rescaling uses c_e = kappa2 - theta_dot, weight 1/h^2, and the
// volume-factor gradient terms b, f from the closed-form metric.  For a flat
// metric both collapse to the same bits, so the tensor threshold E1 of the
// cross-section is exact.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "twistlab/cross_section.hpp"
#include "twistlab/curve_geometry.hpp"
#include "twistlab/eigensolve.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/transverse.hpp"

namespace twistlab {

inline constexpr long kDenseTubeCutoff = 1600;

// Tensor grid on [-L, L] x omega with Dirichlet ends.  DOF index = k*n_t + i
// (s-slab major).  The transverse operator is the exact 2-D discretization,
// so its ground energy is the discrete threshold for every form on this grid.
struct TubeGrid {
  double L = 0.0;
  double delta_s = 0.0;
  int n_s = 0;         // interior slab count; edges are 0..n_s
  double margin = 2.0; // profile data must stay this far from the ends
  CrossSectionDomain dom;
  TransverseOperator top;
  GroundPair ground;
  std::vector<double> s;  // interior slab coordinates

  // full transverse eigenbasis, computed when the grid is too large for dense
  // solves and the tensor preconditioner will be needed
  std::shared_ptr<Eigen::MatrixXd> transverse_modes;
  std::shared_ptr<Eigen::VectorXd> transverse_energies;

  long dof() const { return long(n_s) * top.n; }
  double edge_s(int e) const { return -L + (e + 0.5) * delta_s; }
};

inline TubeGrid make_tube_grid(const ShapeSpec& shape, double delta, double L,
                               double delta_s_target, double margin = 2.0) {
  if (!(L > 0.0) || !(delta_s_target > 0.0))
    throw ConfigError("make_tube_grid: L and delta_s must be positive");
  if (margin < 2.0) throw ConfigError("make_tube_grid: margin must be at least 2");
  TubeGrid g;
  g.L = L;
  g.margin = margin;
  const int n_edges = std::max(2, int(std::lround(2.0 * L / delta_s_target)));
  g.delta_s = 2.0 * L / n_edges;
  g.n_s = n_edges - 1;
  g.s.resize(g.n_s);
  for (int k = 0; k < g.n_s; ++k) g.s[k] = -L + (k + 1) * g.delta_s;

  g.dom = build_domain(shape, delta);
  g.top = build_transverse_operator(g.dom);
  if (g.dof() > kDenseTubeCutoff) {
    EigResult full = dense_eigensolve(g.top.laplace);
    g.ground = dirichlet_ground_pair(g.dom, g.top, {}, &full);
    g.transverse_modes = std::make_shared<Eigen::MatrixXd>(std::move(full.vectors));
    g.transverse_energies = std::make_shared<Eigen::VectorXd>(std::move(full.values));
  } else {
    g.ground = dirichlet_ground_pair(g.dom, g.top);
  }
  return g;
}

struct SymmetricForm {
  SpMat A;  // symmetric, applies the operator in the flat discrete L2
  SpMat M;  // mass; identity after the unitary rescaling to the flat measure
  double E1 = 0.0;
  int n_s = 0, n_t = 0;
  double delta_s = 0.0, delta = 0.0;
  double L = 0.0;
  std::string warning;
  std::shared_ptr<Eigen::MatrixXd> transverse_modes;
  std::shared_ptr<Eigen::VectorXd> transverse_energies;
  Eigen::VectorXd j1;  // transverse ground vector, for solver guesses
};

namespace detail {

// Shared assembly.  sig[e] is the D_tau coefficient at edge e; ws, b (per
// edge*n_t + node) and ft, fc (per slab*edges / slab*cuts) may be empty,
// meaning weight 1 and no zero-order coupling.
inline SymmetricForm assemble_tube_core(const TubeGrid& g, const std::vector<double>& sig,
                                        const std::vector<double>& ws,
                                        const std::vector<double>& b,
                                        const std::vector<double>& ft,
                                        const std::vector<double>& fc) {
  const int nt = g.top.n;
  const int ns = g.n_s;
  const long n = g.dof();
  const double inv_ds = 1.0 / g.delta_s;
  const double d = g.dom.delta;
  const double w2 = 1.0 / (d * d);

  const Eigen::SparseMatrix<double, Eigen::RowMajor> dtau_rows(g.top.d_tau);

  // Longitudinal part: R has one row per (edge, node); A1 = R^T diag(ws) R.
  SpMat R(long(ns + 1) * nt, n);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(R.rows()) * 8);
    for (int e = 0; e <= ns; ++e) {
      const double c_e = sig.empty() ? 0.0 : sig[e];
      for (int side = 0; side < 2; ++side) {
        const int k = e - 1 + side;  // slab left/right of the edge
        if (k < 0 || k >= ns) continue;
        const double dsign = side == 0 ? -inv_ds : inv_ds;
        const long col0 = long(k) * nt;
        const long row0 = long(e) * nt;
        for (int i = 0; i < nt; ++i) {
          trip.emplace_back(row0 + i, col0 + i, dsign);
          if (!b.empty()) {
            const double bv = b[std::size_t(e) * nt + i];
            if (bv != 0.0) trip.emplace_back(row0 + i, col0 + i, 0.5 * bv);
          }
          if (c_e != 0.0)
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(dtau_rows, i);
                 it; ++it)
              trip.emplace_back(row0 + i, col0 + it.col(), 0.5 * c_e * it.value());
        }
      }
    }
    R.setFromTriplets(trip.begin(), trip.end());
  }
  SpMat A;
  if (ws.empty()) {
    A = SpMat(R.transpose()) * R;
  } else {
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(ws.data(), long(ws.size()));
    SpMat WR = w.asDiagonal() * R;
    A = SpMat(R.transpose()) * WR;
  }

  // Transverse part: per-slab edge and cut contributions.  With f = 0 the
  // entries reproduce the 2-D operator bit for bit.
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(ns) * (g.top.edges.size() * 4 + g.top.cuts.size()));
    for (int k = 0; k < ns; ++k) {
      const long c0 = long(k) * nt;
      for (std::size_t ei = 0; ei < g.top.edges.size(); ++ei) {
        const auto& ed = g.top.edges[ei];
        const double f = ft.empty() ? 0.0 : ft[std::size_t(k) * g.top.edges.size() + ei];
        const double q = 0.25 * f * f;
        trip.emplace_back(c0 + ed.m, c0 + ed.m, w2 - f / d + q);
        trip.emplace_back(c0 + ed.n, c0 + ed.n, w2 + f / d + q);
        trip.emplace_back(c0 + ed.m, c0 + ed.n, -w2 + q);
        trip.emplace_back(c0 + ed.n, c0 + ed.m, -w2 + q);
      }
      for (std::size_t ci = 0; ci < g.top.cuts.size(); ++ci) {
        const auto& cu = g.top.cuts[ci];
        const double f = fc.empty() ? 0.0 : fc[std::size_t(k) * g.top.cuts.size() + ci];
        // outward flux (0 - x)/(rho d) + (f/2) x, quadrature weight rho
        trip.emplace_back(c0 + cu.m, c0 + cu.m, w2 / cu.rho - f / d + cu.rho * 0.25 * f * f);
      }
    }
    SpMat At(n, n);
    At.setFromTriplets(trip.begin(), trip.end());
    A += At;
  }

  SymmetricForm form;
  form.A = 0.5 * (SpMat(A.transpose()) + A);
  form.M.resize(n, n);
  form.M.setIdentity();
  form.E1 = g.ground.E1;
  form.n_s = ns;
  form.n_t = nt;
  form.delta_s = g.delta_s;
  form.delta = d;
  form.L = g.L;
  form.transverse_modes = g.transverse_modes;
  form.transverse_energies = g.transverse_energies;
  form.j1 = g.ground.j1;
  return form;
}

}  // namespace detail

// Twisted-straight form: |d1 x + sign*sigma D_tau x|^2 + |grad_t x|^2.  The
// headline convention is sign = -1; spectra are invariant under the flip.
inline SymmetricForm assemble_l_sigma(const TubeGrid& g,
                                      const std::function<double(double)>& sigma,
                                      int sign = -1) {
  if (sign != 1 && sign != -1) throw ConfigError("assemble_l_sigma: sign must be +1 or -1");
  std::vector<double> sig(std::size_t(g.n_s) + 1);
  for (int e = 0; e <= g.n_s; ++e) {
    const double s_e = g.edge_s(e);
    const double v = sigma(s_e);
    if (v != 0.0 && std::abs(s_e) > g.L - g.margin)
      throw ConfigError("assemble_l_sigma: sigma support reaches within margin " +
                        std::to_string(g.margin) + " of the truncation boundary");
    sig[std::size_t(e)] = double(sign) * v;
  }
  return detail::assemble_tube_core(g, sig, {}, {}, {}, {});
}

// Curved-tube form in the rotating frame after the unitary rescaling.
inline SymmetricForm assemble_q(const TubeGrid& g, const CurvatureProfile& p) {
  if (p.s_a < -g.L + g.margin || p.s_b > g.L - g.margin)
    throw ConfigError("assemble_q: profile interval reaches within margin " +
                      std::to_string(g.margin) + " of the truncation boundary");
  if (!(g.dom.a * p.sup_kappa1 < 1.0))
    throw ImmersionError("assemble_q: a * sup|kappa1| = " +
                         std::to_string(g.dom.a * p.sup_kappa1) + " >= 1");

  const int nt = g.top.n;
  const int ns = g.n_s;
  const bool flat = p.kappa1.empty();

  std::vector<double> sig(std::size_t(ns) + 1);
  for (int e = 0; e <= ns; ++e) {
    const double s_e = g.edge_s(e);
    sig[std::size_t(e)] = p.kappa2_at(s_e) - p.theta_dot_at(s_e);
  }

  std::vector<double> ws, b, ft, fc;
  if (!flat) {
    ws.resize(std::size_t(ns + 1) * nt);
    b.resize(std::size_t(ns + 1) * nt);
    for (int e = 0; e <= ns; ++e) {
      const double s_e = g.edge_s(e);
      for (int i = 0; i < nt; ++i) {
        const MetricSample m = metric_at(p, s_e, g.dom.nodes[i](0), g.dom.nodes[i](1));
        ws[std::size_t(e) * nt + i] = 1.0 / (m.h * m.h);
        b[std::size_t(e) * nt + i] = -(m.dF(0) - m.h2 * m.dF(1) - m.h3 * m.dF(2));
      }
    }
    const double d = g.dom.delta;
    ft.resize(std::size_t(ns) * g.top.edges.size());
    fc.resize(std::size_t(ns) * g.top.cuts.size());
    for (int k = 0; k < ns; ++k) {
      const double s_k = g.s[std::size_t(k)];
      for (std::size_t ei = 0; ei < g.top.edges.size(); ++ei) {
        const auto& ed = g.top.edges[ei];
        Eigen::Vector2d mid = g.dom.nodes[ed.m];
        mid(ed.axis) += 0.5 * d;
        const MetricSample m = metric_at(p, s_k, mid(0), mid(1));
        ft[std::size_t(k) * g.top.edges.size() + ei] = -m.dF(1 + ed.axis);
      }
      for (std::size_t ci = 0; ci < g.top.cuts.size(); ++ci) {
        const auto& cu = g.top.cuts[ci];
        // directions 0..3 = +t2, -t2, +t3, -t3; outward derivative of F
        const int axis = cu.dir / 2;
        const double sgn = cu.dir % 2 == 0 ? 1.0 : -1.0;
        Eigen::Vector2d mid = g.dom.nodes[cu.m];
        mid(axis) += sgn * 0.5 * cu.rho * d;
        const MetricSample m = metric_at(p, s_k, mid(0), mid(1));
        fc[std::size_t(k) * g.top.cuts.size() + ci] = -sgn * m.dF(1 + axis);
      }
    }
  }

  SymmetricForm form = detail::assemble_tube_core(g, sig, ws, b, ft, fc);
  const InjectivityReport inj = check_injectivity(p, g.dom.a);
  if (!inj.certified)
    form.warning = "injectivity certificate inconclusive (criterion value " +
                   std::to_string(inj.injectivity_bound) + ")";
  return form;
}

// Preconditioner (A0 - tau)^{-1} for the tensor reference A0 = T_s (+) A_t,
// applied through the dense transverse eigenbasis and per-mode Thomas solves.
struct TensorPreconditioner {
  std::shared_ptr<Eigen::MatrixXd> V;
  std::shared_ptr<Eigen::VectorXd> Et;
  int n_s = 0;
  double delta_s = 0.0;
  double tau = 0.0;

  Eigen::MatrixXd operator()(const Eigen::MatrixXd& R) const {
    const int nt = int(V->rows());
    const double w = 1.0 / (delta_s * delta_s);
    Eigen::MatrixXd out(R.rows(), R.cols());
    Eigen::MatrixXd Y(nt, n_s), Z(n_s, nt);
    for (int c = 0; c < R.cols(); ++c) {
      Eigen::Map<const Eigen::MatrixXd> Rc(R.col(c).data(), nt, n_s);
      Y.noalias() = V->transpose() * Rc;
      Z = Y.transpose();
      for (int i = 0; i < nt; ++i)
        tridiag_solve_inplace(2.0 * w + (*Et)(i) - tau, -w, Z.col(i));
      Y = Z.transpose();
      Eigen::Map<Eigen::MatrixXd> Oc(out.col(c).data(), nt, n_s);
      Oc.noalias() = (*V) * Y;
    }
    return out;
  }
};

struct SpectralResult {
  std::vector<double> below;  // eigenvalues below the threshold, sorted
  Eigen::MatrixXd vectors;    // matching columns
  Eigen::VectorXd residuals;  // ||A x - mu x|| for all computed pairs
  double smallest = 0.0;      // smallest computed eigenvalue (diagnostic)
  double E1 = 0.0;
  double L = 0.0;
  int iterations = 0;
};

// Smallest k eigenpairs of the form; reports those below E1 - gap_tol.
inline SpectralResult eigenvalues_below_threshold(const SymmetricForm& form, double E1, int k,
                                                  const EigOptions& user_opt = {},
                                                  double gap_tol = 1e-9) {
  if (k < 1) throw ConfigError("eigenvalues_below_threshold: k must be >= 1");
  const long n = form.A.rows();
  SpectralResult res;
  res.E1 = E1;
  res.L = form.L;

  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  if (n <= kDenseTubeCutoff) {
    EigResult r = dense_eigensolve(form.A);
    const int kk = int(std::min<long>(k, n));
    vals = r.values.head(kk);
    vecs = r.vectors.leftCols(kk);
    res.iterations = 0;
  } else {
    if (!form.transverse_modes)
      throw SolverError("eigenvalues_below_threshold: missing transverse eigenbasis", {});
    TensorPreconditioner T{form.transverse_modes, form.transverse_energies, form.n_s,
                           form.delta_s, 0.75 * form.E1};
    EigOptions opt = user_opt;
    opt.tol_abs = std::min(opt.tol_abs, 1e-8);
    opt.value_tol = 0.0;  // reported pairs must meet the residual bound
    // tensor-product guesses: transverse ground state times low sine modes
    const int m = k + opt.block_extra;
    Eigen::MatrixXd guess(n, m);
    for (int j = 0; j < m; ++j) {
      for (int s_i = 0; s_i < form.n_s; ++s_i) {
        const double phase = double(j + 1) * std::numbers::pi * double(s_i + 1) /
                             double(form.n_s + 1);
        guess.block(long(s_i) * form.n_t, j, form.n_t, 1) = std::sin(phase) * form.j1;
      }
    }
    auto applyA = [&form](const Eigen::MatrixXd& X) { return (form.A * X).eval(); };
    EigResult r = lobpcg_smallest(n, applyA, T, k, opt, &guess);
    if (!r.converged)
      throw SolverError("eigenvalues_below_threshold: stalled at residual " +
                            std::to_string(r.residuals.maxCoeff()),
                        r.residual_history);
    vals = r.values;
    vecs = r.vectors;
    res.iterations = r.iterations;
  }

  res.smallest = vals(0);
  res.residuals.resize(vals.size());
  for (int i = 0; i < vals.size(); ++i)
    res.residuals(i) = (form.A * vecs.col(i) - vals(i) * vecs.col(i)).norm() /
                       vecs.col(i).norm();
  for (int i = 0; i < vals.size(); ++i) {
    if (vals(i) < E1 - gap_tol) {
      res.below.push_back(vals(i));
    }
  }
  res.vectors.resize(vecs.rows(), long(res.below.size()));
  for (long i = 0; i < long(res.below.size()); ++i) res.vectors.col(i) = vecs.col(i);
  return res;
}

struct TruncationRow {
  double L = 0.0;
  double lowest = 0.0;
  int count_below = 0;
  double residual = 0.0;
};

struct TruncationStudy {
  std::vector<TruncationRow> rows;
  bool stabilized = false;   // lowest eigenvalue Cauchy over the last two L
  double last_change = 0.0;  // |lowest(L_last) - lowest(L_prev)|
};

// Growth-in-L protocol: eigenvalues below E1 on the truncated tube count as
// genuine only once they stop moving under further truncation growth.
inline TruncationStudy truncation_study(const std::function<SymmetricForm(double)>& assemble,
                                        const std::vector<double>& L_values, int k = 5,
                                        double cauchy_tol = 1e-6,
                                        const EigOptions& opt = {}) {
  if (L_values.size() < 2) throw ConfigError("truncation_study: need at least two lengths");
  for (std::size_t i = 1; i < L_values.size(); ++i)
    if (!(L_values[i] > L_values[i - 1]))
      throw ConfigError("truncation_study: lengths must increase");

  TruncationStudy study;
  for (double L : L_values) {
    SymmetricForm form = assemble(L);
    SpectralResult r = eigenvalues_below_threshold(form, form.E1, k, opt);
    TruncationRow row;
    row.L = L;
    row.lowest = r.smallest;
    row.count_below = int(r.below.size());
    row.residual = r.residuals(0);
    study.rows.push_back(row);
  }
  const auto& last = study.rows[study.rows.size() - 1];
  const auto& prev = study.rows[study.rows.size() - 2];
  study.last_change = std::abs(last.lowest - prev.lowest);
  study.stabilized = last.count_below > 0 && prev.count_below > 0 &&
                     study.last_change < cauchy_tol;
  return study;
}

}  // namespace twistlab
