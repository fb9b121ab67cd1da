#pragma once

// Symmetric eigenvalue machinery shared by the transverse and tube operators:
//  - dense full solves (small problems and oracles),
//  - a preconditioned block LOBPCG for the smallest eigenpairs of A = A^T,
//  - Thomas solves for the tridiagonal systems of tensor preconditioners.
// Generalized pencils with diagonal mass are handled by whitening at the call
// site, so the iteration itself only ever sees a standard problem.  All blocks
// are kept explicitly orthonormal (repeated SVQB passes); that keeps the
// attainable residual floor near machine precision times the operator norm.
// All randomness is seeded explicitly; repeated runs are bit-reproducible.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "twistlab/errors.hpp"

namespace twistlab {

using SpMat = Eigen::SparseMatrix<double>;

struct EigOptions {
  int max_iter = 500;
  double tol_abs = 1e-9;    // residual test: ||A x - mu x||_2 for ||x||_2 = 1
  double value_tol = 1e-10; // eigenvalue test: gap bound r^2/gap; <= 0 disables
  int block_extra = 3;      // extra vectors beyond the requested count
  std::uint64_t seed = 0x7a195eedULL;
};

struct EigResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // orthonormal columns
  Eigen::VectorXd residuals;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // max residual over requested pairs
};

// Dense reference: all eigenpairs of a symmetric matrix, or of a symmetric
// pencil (A, diag(b)).
inline EigResult dense_eigensolve(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", {});
  EigResult r;
  r.values = es.eigenvalues();
  r.vectors = es.eigenvectors();
  r.residuals = Eigen::VectorXd::Zero(A.rows());
  r.converged = true;
  return r;
}

inline EigResult dense_eigensolve(const SpMat& A) { return dense_eigensolve(Eigen::MatrixXd(A)); }

inline EigResult dense_eigensolve_pencil(const Eigen::MatrixXd& A, const Eigen::VectorXd& bdiag) {
  const Eigen::VectorXd isq = bdiag.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd T = isq.asDiagonal() * A * isq.asDiagonal();
  EigResult r = dense_eigensolve(T);
  r.vectors = isq.asDiagonal() * r.vectors;
  return r;
}

namespace detail {

inline Eigen::MatrixXd seeded_random(long rows, long cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd X(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) X(i, j) = u(rng);
  return X;
}

// Orthonormalize the columns of Y in place (SVQB), dropping directions whose
// Gram eigenvalue falls below drop_tol times the largest.  Returns the total
// column transform so companion products can be updated consistently.
inline Eigen::MatrixXd svqb(Eigen::MatrixXd& Y, double drop_tol = 1e-12) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(Y.cols(), Y.cols());
  for (int pass = 0; pass < 2; ++pass) {
    if (Y.cols() == 0) break;
    Eigen::MatrixXd G = Y.transpose() * Y;
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd d = es.eigenvalues();
    const double dmax = std::max(d.maxCoeff(), 0.0);
    std::vector<int> keep;
    for (int i = 0; i < d.size(); ++i)
      if (d(i) > drop_tol * dmax) keep.push_back(i);
    Eigen::MatrixXd S(G.rows(), keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c)
      S.col(long(c)) = es.eigenvectors().col(keep[c]) / std::sqrt(d(keep[c]));
    Y = (Y * S).eval();
    T = (T * S).eval();
    if (int(keep.size()) == int(G.rows()) && (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-14)
      break;
  }
  return T;
}

inline void project_out(const Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
  if (X.cols() == 0 || Y.cols() == 0) return;
  Y.noalias() -= X * (X.transpose() * Y);
  Y.noalias() -= X * (X.transpose() * Y);  // second pass against round-off
}

// Rayleigh-Ritz over span(S) with Gram correction.  Returns the `want`
// smallest Ritz pairs; throws if the basis cannot supply them.
struct RitzOut {
  Eigen::MatrixXd V, AV, coef;
  Eigen::VectorXd theta;
};

inline RitzOut stable_ritz(const Eigen::MatrixXd& S, const Eigen::MatrixXd& AS, int want) {
  Eigen::MatrixXd G = S.transpose() * S;
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gs(G);
  const Eigen::VectorXd d = gs.eigenvalues();
  const double dmax = std::max(d.maxCoeff(), 0.0);
  std::vector<int> keep;
  for (int i = 0; i < d.size(); ++i)
    if (d(i) > 1e-12 * dmax) keep.push_back(i);
  if (int(keep.size()) < want) throw SolverError("rayleigh-ritz basis collapsed", {});
  Eigen::MatrixXd W(G.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    W.col(long(c)) = gs.eigenvectors().col(keep[c]) / std::sqrt(d(keep[c]));
  Eigen::MatrixXd H = W.transpose() * (S.transpose() * AS) * W;
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(H);
  RitzOut r;
  r.coef = W * hs.eigenvectors().leftCols(want);
  r.theta = hs.eigenvalues().head(want);
  r.V = S * r.coef;
  r.AV = AS * r.coef;
  return r;
}

}  // namespace detail

// Block LOBPCG with explicit orthonormalization.  applyA/applyT map an n-by-k
// block to an n-by-k block; applyT is an SPD preconditioner (approximate
// inverse of A shifted below the target cluster).
template <class OpA, class OpT>
EigResult lobpcg_smallest(long n, OpA&& applyA, OpT&& applyT, int nev, const EigOptions& opt,
                          const Eigen::MatrixXd* guess = nullptr) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  if (nev <= 0 || nev > n) throw SolverError("lobpcg: bad eigenpair count", {});
  const int m = int(std::min<long>(n, nev + opt.block_extra));

  // Tiny problems: realize the operator on the identity and solve densely.
  if (n <= 3L * m + 2) {
    MatrixXd A = applyA(MatrixXd::Identity(n, n));
    EigResult r = dense_eigensolve(Eigen::MatrixXd(0.5 * (A + A.transpose())));
    r.values.conservativeResize(nev);
    r.vectors.conservativeResize(Eigen::NoChange, nev);
    r.residuals = VectorXd::Zero(nev);
    return r;
  }

  MatrixXd X = detail::seeded_random(n, m, opt.seed);
  if (guess && guess->rows() == n && guess->cols() > 0) {
    const int g = std::min<int>(m, int(guess->cols()));
    X.leftCols(g) = guess->leftCols(g);
  }
  detail::svqb(X);
  MatrixXd AX = applyA(X);
  VectorXd theta(m);
  {
    auto rz = detail::stable_ritz(X, AX, m);
    X = rz.V;
    AX = rz.AV;
    theta = rz.theta;
  }
  MatrixXd P(n, 0), AP(n, 0);

  EigResult out;
  for (int it = 0; it < opt.max_iter; ++it) {
    MatrixXd R = AX - X * theta.asDiagonal();
    VectorXd rn(m);
    for (int i = 0; i < m; ++i) rn(i) = R.col(i).norm();
    out.values = theta.head(nev);
    out.residuals = rn.head(nev);
    out.residual_history.push_back(rn.head(nev).maxCoeff());
    out.iterations = it + 1;

    // A requested pair counts as converged when either its residual is below
    // tol_abs or the Kato-Temple style bound r^2/gap certifies the value; the
    // gap is measured to the nearest Ritz value outside the r-cluster.
    bool all_ok = true;
    for (int i = 0; i < nev && all_ok; ++i) {
      if (rn(i) <= opt.tol_abs) continue;
      if (opt.value_tol <= 0.0) {
        all_ok = false;
        break;
      }
      double gap = std::numeric_limits<double>::infinity();
      for (int j = 0; j < m; ++j) {
        const double dd = std::abs(theta(j) - theta(i));
        if (j != i && dd > 3.0 * rn(i)) gap = std::min(gap, dd);
      }
      if (!std::isfinite(gap)) gap = std::max(std::abs(theta(i)), 1.0);
      const double err = rn(i) < gap ? rn(i) * rn(i) / gap : rn(i);
      if (err > opt.value_tol) all_ok = false;
    }
    if (all_ok) {
      out.vectors = X.leftCols(nev);
      out.converged = true;
      return out;
    }

    MatrixXd W = applyT(R);
    detail::project_out(X, W);
    detail::project_out(P, W);
    detail::svqb(W, 1e-10);
    if (W.cols() == 0) break;  // no new directions: stalled at the basis floor
    MatrixXd AW = applyA(W);

    MatrixXd S(n, X.cols() + W.cols() + P.cols());
    S << X, W, P;
    MatrixXd AS(n, S.cols());
    AS << AX, AW, AP;
    try {
      auto rz = detail::stable_ritz(S, AS, m);
      MatrixXd coef_p = rz.coef;
      coef_p.topRows(X.cols()).setZero();
      P = S * coef_p;
      AP = AS * coef_p;
      const MatrixXd T = detail::svqb(P, 1e-10);
      AP = (AP * T).eval();
      X = rz.V;
      AX = rz.AV;
      theta = rz.theta;
    } catch (const SolverError&) {
      // Stagnated basis: restart without the conjugate block.
      P.resize(n, 0);
      AP.resize(n, 0);
    }
    if ((it + 1) % 20 == 0) {  // refresh carried products against round-off
      AX = applyA(X);
      if (P.cols() > 0) AP = applyA(P);
    }
  }
  out.vectors = X.leftCols(nev);
  out.converged = false;
  return out;
}

// Convenience: sparse A, preconditioner = LDLT of K (defaults to A).
struct LdltPreconditioner {
  Eigen::SimplicialLDLT<SpMat> fact;
  explicit LdltPreconditioner(const SpMat& K) {
    fact.compute(K);
    if (fact.info() != Eigen::Success) throw SolverError("LDLT factorization failed", {});
  }
  Eigen::MatrixXd operator()(const Eigen::MatrixXd& R) const { return fact.solve(R); }
};

inline EigResult sparse_smallest(const SpMat& A, int nev, const EigOptions& opt,
                                 const SpMat* precond_matrix = nullptr,
                                 const Eigen::MatrixXd* guess = nullptr) {
  LdltPreconditioner T(precond_matrix ? *precond_matrix : A);
  auto applyA = [&](const Eigen::MatrixXd& Y) { return (A * Y).eval(); };
  return lobpcg_smallest(A.rows(), applyA, T, nev, opt, guess);
}

// Thomas algorithm for SPD tridiagonal systems tridiag(off, diag, off) x = rhs.
inline void tridiag_solve_inplace(const Eigen::VectorXd& diag, double off,
                                  Eigen::Ref<Eigen::VectorXd> x) {
  const long n = diag.size();
  static thread_local std::vector<double> cp, dp;
  cp.assign(n, 0.0);
  dp.assign(n, 0.0);
  cp[0] = off / diag(0);
  dp[0] = x(0) / diag(0);
  for (long i = 1; i < n; ++i) {
    const double w = diag(i) - off * cp[i - 1];
    cp[i] = off / w;
    dp[i] = (x(i) - off * dp[i - 1]) / w;
  }
  x(n - 1) = dp[n - 1];
  for (long i = n - 2; i >= 0; --i) x(i) = dp[i] - cp[i] * x(i + 1);
}

inline void tridiag_solve_inplace(double diag, double off, Eigen::Ref<Eigen::VectorXd> x) {
  const long n = x.size();
  static thread_local std::vector<double> cp, dp;
  cp.assign(n, 0.0);
  dp.assign(n, 0.0);
  cp[0] = off / diag;
  dp[0] = x(0) / diag;
  for (long i = 1; i < n; ++i) {
    const double w = diag - off * cp[i - 1];
    cp[i] = off / w;
    dp[i] = (x(i) - off * dp[i - 1]) / w;
  }
  x(n - 1) = dp[n - 1];
  for (long i = n - 2; i >= 0; --i) x(i) = dp[i] - cp[i] * x(i + 1);
}

// Variable coefficients: diag(i), off(i) couples i and i+1.
inline void tridiag_solve_inplace(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                  Eigen::Ref<Eigen::VectorXd> x) {
  const long n = diag.size();
  static thread_local std::vector<double> cp, dp;
  cp.assign(n, 0.0);
  dp.assign(n, 0.0);
  cp[0] = (n > 1 ? off(0) : 0.0) / diag(0);
  dp[0] = x(0) / diag(0);
  for (long i = 1; i < n; ++i) {
    const double w = diag(i) - off(i - 1) * cp[i - 1];
    if (i < n - 1) cp[i] = off(i) / w;
    dp[i] = (x(i) - off(i - 1) * dp[i - 1]) / w;
  }
  x(n - 1) = dp[n - 1];
  for (long i = n - 2; i >= 0; --i) x(i) = dp[i] - cp[i] * x(i + 1);
}

}  // namespace twistlab
