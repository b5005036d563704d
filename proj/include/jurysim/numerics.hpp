#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include "jurysim/engine.hpp"

namespace jurysim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Pearson correlation of the columns of a rows x cols observation matrix.
// A zero-variance column correlates 0 with everything and 1 with itself, so
// constant voters stay representable without poisoning the decomposition.
inline Matrix correlation_matrix(const Matrix& obs) {
  const auto r = obs.rows();
  const auto n = obs.cols();
  if (r < 2) throw std::invalid_argument("correlation_matrix: need at least 2 rows");

  Matrix z = obs.rowwise() - obs.colwise().mean();
  Matrix gram(n, n);
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());

  Vector ss = gram.diagonal();
  const double tiny = 1e-12;
  Vector inv_norm(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    inv_norm(j) = ss(j) > tiny ? 1.0 / std::sqrt(ss(j)) : 0.0;
  }
  const Matrix full_gram = gram.selfadjointView<Eigen::Lower>();
  Matrix corr = inv_norm.asDiagonal() * full_gram * inv_norm.asDiagonal();
  corr.diagonal().setOnes();
  // Clip round-off spill outside [-1, 1].
  corr = corr.cwiseMax(-1.0).cwiseMin(1.0);
  return corr;
}

inline Matrix correlation_matrix(const VoteMatrix& votes) {
  const Matrix obs = votes.cast<double>();
  return correlation_matrix(obs);
}

// Eigendecomposition of a symmetric positive-semidefinite matrix, eigenvalues
// sorted descending.  For such input this coincides with the singular value
// decomposition with U == V.
struct SpectralDecomposition {
  Matrix eigenvectors;  // columns, same order as eigenvalues
  Vector eigenvalues;   // descending, clamped at >= 0
};

// Uses LAPACK's divide-and-conquer symmetric solver, falling back to Eigen's
// if it fails to converge.  Intended for correlation matrices: round-off
// negatives are clamped to zero.  Each eigenvector is oriented so its
// largest-magnitude entry is positive, giving a deterministic sign.
inline SpectralDecomposition decompose(const Matrix& sym) {
  const auto n = sym.rows();
  if (n == 0 || sym.cols() != n) throw std::invalid_argument("decompose: matrix must be square");
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  if (((sym - sym.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale) {
    throw std::invalid_argument("decompose: matrix is not symmetric");
  }

  Matrix vecs = sym;
  Vector vals(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                         vecs.data(), static_cast<lapack_int>(n), vals.data());
  if (info != 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("decompose: eigensolver failed to converge");
    }
    vecs = solver.eigenvectors();
    vals = solver.eigenvalues();
  }

  // Ascending from both solvers; flip to descending and fix signs.
  SpectralDecomposition d;
  d.eigenvectors.resize(n, n);
  d.eigenvalues.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = n - 1 - j;
    d.eigenvalues(j) = std::max(vals(src), 0.0);
    Vector col = vecs.col(src);
    Eigen::Index peak = 0;
    col.cwiseAbs().maxCoeff(&peak);
    if (col(peak) < 0.0) col = -col;
    d.eigenvectors.col(j) = col;
  }
  return d;
}

// Agent coordinates in the dominant q components: column j is
// eigenvector_j * eigenvalue_j.  Rows index agents.
inline Matrix component_scores(const SpectralDecomposition& d, int q) {
  const auto n = d.eigenvalues.size();
  if (q < 1 || q > n) throw std::invalid_argument("component_scores: need 1 <= q <= n");
  return d.eigenvectors.leftCols(q) * d.eigenvalues.head(q).asDiagonal();
}

}  // namespace jurysim
