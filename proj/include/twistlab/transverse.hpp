#pragma once

// Operators on the cross-section grid: the five-point Dirichlet Laplacian
// (edge-based, with boundary-cut diagonal corrections), the discrete angular
// derivative t3*d2 - t2*d3, the ground pair (E1, j1), and the quantity
//
//   lambda = min spec( (-Laplace - E1) + Dtau^T Dtau )
//
// in the discrete L2(omega) inner product.  lambda > 0 exactly when the
// cross-section is rotationally asymmetric about the origin; it degenerates to
// zero under refinement for origin-centered disks.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "twistlab/cross_section.hpp"
#include "twistlab/eigensolve.hpp"
#include "twistlab/errors.hpp"

namespace twistlab {

struct TransverseOperator {
  SpMat laplace;  // applies -Laplace_h, SPD
  SpMat d_tau;    // applies t3*d2 - t2*d3 (centered; one-sided at the boundary)
  // Edge lists, reused by the tube assembly so its transverse block matches
  // `laplace` exactly.
  struct Edge {
    int m, n;   // node ids, m < n
    int axis;   // 0: t2-direction, 1: t3-direction
  };
  struct Cut {
    int m;
    int dir;     // 0:+t2 1:-t2 2:+t3 3:-t3
    double rho;  // boundary distance / delta, in (0,1]
  };
  std::vector<Edge> edges;
  std::vector<Cut> cuts;
  double delta = 0.0;
  int n = 0;
};

inline TransverseOperator build_transverse_operator(const CrossSectionDomain& dom) {
  TransverseOperator op;
  op.delta = dom.delta;
  op.n = dom.size();
  const double w = 1.0 / (dom.delta * dom.delta);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(op.n) * 5);
  for (int m = 0; m < op.n; ++m) {
    for (int d = 0; d < 4; ++d) {
      const int nb = dom.neighbor[m][d];
      if (nb >= 0) {
        if (nb > m) {
          trip.emplace_back(m, m, w);
          trip.emplace_back(nb, nb, w);
          trip.emplace_back(m, nb, -w);
          trip.emplace_back(nb, m, -w);
          op.edges.push_back({m, nb, d < 2 ? 0 : 1});
        }
      } else {
        trip.emplace_back(m, m, w / dom.cut_rho[m][d]);
        op.cuts.push_back({m, d, dom.cut_rho[m][d]});
      }
    }
  }
  op.laplace.resize(op.n, op.n);
  op.laplace.setFromTriplets(trip.begin(), trip.end());
  op.laplace.makeCompressed();

  // Angular derivative.  Centered difference where both neighbors exist,
  // one-sided otherwise (consistent with extension by zero outside omega).
  std::vector<Eigen::Triplet<double>> dt;
  dt.reserve(std::size_t(op.n) * 5);
  const double inv2d = 1.0 / (2.0 * dom.delta);
  const double invd = 1.0 / dom.delta;
  for (int m = 0; m < op.n; ++m) {
    const double t2 = dom.nodes[m].x();
    const double t3 = dom.nodes[m].y();
    // t3 * d/dt2
    {
      const int p = dom.neighbor[m][0], q = dom.neighbor[m][1];
      if (p >= 0 && q >= 0) {
        dt.emplace_back(m, p, t3 * inv2d);
        dt.emplace_back(m, q, -t3 * inv2d);
      } else if (p >= 0) {
        dt.emplace_back(m, p, t3 * invd);
        dt.emplace_back(m, m, -t3 * invd);
      } else if (q >= 0) {
        dt.emplace_back(m, m, t3 * invd);
        dt.emplace_back(m, q, -t3 * invd);
      }
    }
    // -t2 * d/dt3
    {
      const int p = dom.neighbor[m][2], q = dom.neighbor[m][3];
      if (p >= 0 && q >= 0) {
        dt.emplace_back(m, p, -t2 * inv2d);
        dt.emplace_back(m, q, t2 * inv2d);
      } else if (p >= 0) {
        dt.emplace_back(m, p, -t2 * invd);
        dt.emplace_back(m, m, t2 * invd);
      } else if (q >= 0) {
        dt.emplace_back(m, m, -t2 * invd);
        dt.emplace_back(m, q, t2 * invd);
      }
    }
  }
  op.d_tau.resize(op.n, op.n);
  op.d_tau.setFromTriplets(dt.begin(), dt.end());
  op.d_tau.makeCompressed();
  return op;
}

struct GroundPair {
  double E1 = 0.0;
  double E2 = 0.0;             // next eigenvalue, for the degeneracy guard
  Eigen::VectorXd j1;          // strictly positive, discrete-L2 normalized
  double residual = 0.0;
  double rayleigh_check = 0.0; // quadratic-form quotient of j1
  double delta = 0.0;
};

inline constexpr int kDenseCutoff = 2300;

inline GroundPair dirichlet_ground_pair(const CrossSectionDomain& dom, const TransverseOperator& op,
                                        const EigOptions& user_opt = {},
                                        const EigResult* precomputed = nullptr) {
  const int n = op.n;
  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  double residual = 0.0;
  if (precomputed) {
    vals = precomputed->values.head(std::min(n, 2));
    vecs = precomputed->vectors.leftCols(std::min(n, 2));
  } else if (n <= kDenseCutoff) {
    EigResult r = dense_eigensolve(op.laplace);
    vals = r.values.head(std::min(n, 2));
    vecs = r.vectors.leftCols(std::min(n, 2));
  } else {
    EigOptions opt = user_opt;
    // Residuals live on the scale of ||A|| ~ 8/delta^2; accept tol relative to it.
    opt.tol_abs = user_opt.tol_abs * std::max(1.0, op.laplace.coeffs().maxCoeff());
    EigResult r = sparse_smallest(op.laplace, 2, opt, &op.laplace);
    if (!r.converged)
      throw SolverError("dirichlet_ground_pair: eigensolver stalled at residual " +
                            std::to_string(r.residuals.maxCoeff()),
                        r.residual_history);
    vals = r.values;
    vecs = r.vectors;
    residual = r.residuals(0);
  }
  if (n >= 2 && vals(1) - vals(0) < 1e-8)
    throw DiscretizationError("dirichlet_ground_pair: near-degenerate ground state, gap " +
                              std::to_string(vals(1) - vals(0)));

  GroundPair g;
  g.E1 = vals(0);
  g.E2 = n >= 2 ? vals(1) : vals(0);
  g.delta = dom.delta;
  g.residual = residual;
  Eigen::VectorXd v = vecs.col(0);

  // Fix the sign to be positive near the shape center, then insist on strict
  // positivity (guaranteed for a connected rasterization).
  const Eigen::Vector2d c = shape_center(dom.shape);
  int nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m < n; ++m) {
    const double dist = (dom.nodes[m] - c).squaredNorm();
    if (dist < best) {
      best = dist;
      nearest = m;
    }
  }
  if (v(nearest) < 0.0) v = -v;
  if (v.minCoeff() <= 0.0)
    throw DiscretizationError("dirichlet_ground_pair: ground vector not strictly positive");
  v /= (dom.delta * v.norm());  // discrete L2 normalization
  g.j1 = v;
  g.rayleigh_check = v.dot(op.laplace * v) / v.squaredNorm();
  return g;
}

struct LambdaResult {
  double lambda = 0.0;
  double E1 = 0.0;
  Eigen::VectorXd minimizer;  // discrete-L2 normalized
  double asymmetry_norm = 0.0;  // max |B - B^T| entry before symmetrization
  std::vector<std::pair<double, double>> history;  // (delta, lambda) pairs
};

inline LambdaResult compute_lambda(const CrossSectionDomain& dom, const TransverseOperator& op,
                                   const GroundPair& ground, const EigOptions& user_opt = {}) {
  const int n = op.n;
  SpMat eye(n, n);
  eye.setIdentity();
  SpMat dtd = SpMat(op.d_tau.transpose()) * op.d_tau;
  SpMat B = op.laplace - ground.E1 * eye + dtd;

  LambdaResult res;
  res.E1 = ground.E1;
  {
    SpMat D = SpMat(B.transpose()) - B;
    res.asymmetry_norm = D.coeffs().size() > 0 ? D.coeffs().cwiseAbs().maxCoeff() : 0.0;
    if (res.asymmetry_norm != 0.0) B = 0.5 * (SpMat(B.transpose()) + B);
  }

  Eigen::VectorXd v;
  if (n <= kDenseCutoff) {
    EigResult r = dense_eigensolve(B);
    res.lambda = r.values(0);
    v = r.vectors.col(0);
  } else {
    // Shifted LDLT preconditioner keeps the factorization positive definite
    // even when lambda itself is (numerically) zero.
    const double shift = 1e-3 * std::max(ground.E1, 1.0);
    SpMat K = B + shift * eye;
    EigOptions opt = user_opt;
    opt.tol_abs = user_opt.tol_abs * std::max(1.0, op.laplace.coeffs().maxCoeff());
    Eigen::MatrixXd guess = ground.j1;
    EigResult r = sparse_smallest(B, 1, opt, &K, &guess);
    if (!r.converged)
      throw SolverError("compute_lambda: eigensolver stalled at residual " +
                            std::to_string(r.residuals.maxCoeff()),
                        r.residual_history);
    res.lambda = r.values(0);
    v = r.vectors.col(0);
  }
  const double scale = std::max(1.0, ground.E1);
  if (res.lambda < -1e-8 * scale)
    throw SolverError("compute_lambda: negative lambda beyond solver tolerance: " +
                          std::to_string(res.lambda),
                      {});
  v /= (dom.delta * v.norm());
  res.minimizer = v;
  res.history.emplace_back(dom.delta, res.lambda);
  return res;
}

// Convenience wrapper: lambda across a refinement ladder of grid spacings.
// The result carries the finest-grid solution plus the (delta, lambda) ladder.
inline LambdaResult compute_lambda_refined(const ShapeSpec& shape, const std::vector<double>& deltas,
                                           const EigOptions& opt = {}) {
  LambdaResult out;
  std::vector<std::pair<double, double>> ladder;
  for (double d : deltas) {
    CrossSectionDomain dom = build_domain(shape, d);
    TransverseOperator op = build_transverse_operator(dom);
    GroundPair g = dirichlet_ground_pair(dom, op, opt);
    out = compute_lambda(dom, op, g, opt);
    ladder.emplace_back(d, out.lambda);
  }
  out.history = std::move(ladder);
  return out;
}

}  // namespace twistlab
