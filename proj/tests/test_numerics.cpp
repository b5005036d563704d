#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "jurysim/numerics.hpp"
#include "jurysim/random.hpp"

using namespace jurysim;

namespace {

// Naive two-pass Pearson correlation, written independently as an oracle.
double pearson(const Vector& x, const Vector& y) {
  const auto n = x.size();
  const double mx = x.mean();
  const double my = y.mean();
  double sxy = 0, sxx = 0, syy = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sxy += (x(i) - mx) * (y(i) - my);
    sxx += (x(i) - mx) * (x(i) - mx);
    syy += (y(i) - my) * (y(i) - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

Matrix random_matrix(int rows, int cols, RandomStream& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

}  // namespace

TEST_CASE("correlation matches a naive pairwise oracle", "[numerics]") {
  RandomStream rng(661);
  const Matrix obs = random_matrix(40, 6, rng);
  const Matrix corr = correlation_matrix(obs);
  REQUIRE(corr.rows() == 6);
  REQUIRE(corr.cols() == 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double want = i == j ? 1.0 : pearson(obs.col(i), obs.col(j));
      REQUIRE_THAT(corr(i, j), Catch::Matchers::WithinAbs(want, 1e-12));
    }
  }
}

TEST_CASE("correlation is symmetric with unit diagonal and unit trace sum", "[numerics]") {
  RandomStream rng(12);
  const Matrix obs = random_matrix(100, 12, rng);
  const Matrix corr = correlation_matrix(obs);
  REQUIRE((corr - corr.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  for (int j = 0; j < 12; ++j) REQUIRE(corr(j, j) == 1.0);
  REQUIRE_THAT(corr.trace(), Catch::Matchers::WithinAbs(12.0, 1e-12));
  REQUIRE(corr.maxCoeff() <= 1.0);
  REQUIRE(corr.minCoeff() >= -1.0);
}

TEST_CASE("identical and negated columns correlate at +/-1", "[numerics]") {
  RandomStream rng(8);
  Matrix obs(30, 3);
  for (int i = 0; i < 30; ++i) {
    obs(i, 0) = rng.uniform(-2, 2);
    obs(i, 1) = obs(i, 0);
    obs(i, 2) = -obs(i, 0);
  }
  const Matrix corr = correlation_matrix(obs);
  REQUIRE_THAT(corr(0, 1), Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(corr(0, 2), Catch::Matchers::WithinAbs(-1.0, 1e-12));
  REQUIRE_THAT(corr(1, 2), Catch::Matchers::WithinAbs(-1.0, 1e-12));
}

TEST_CASE("independent columns correlate near zero", "[numerics]") {
  RandomStream rng(314);
  const Matrix obs = random_matrix(20000, 4, rng);
  const Matrix corr = correlation_matrix(obs);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      REQUIRE(std::abs(corr(i, j)) < 0.03);
    }
  }
}

TEST_CASE("a constant column correlates 0 off-diagonal and 1 with itself", "[numerics]") {
  Matrix obs(10, 3);
  RandomStream rng(5);
  for (int i = 0; i < 10; ++i) {
    obs(i, 0) = rng.uniform(0, 1);
    obs(i, 1) = 1.0;  // constant voter
    obs(i, 2) = rng.uniform(0, 1);
  }
  const Matrix corr = correlation_matrix(obs);
  REQUIRE(corr(0, 1) == 0.0);
  REQUIRE(corr(1, 0) == 0.0);
  REQUIRE(corr(1, 2) == 0.0);
  REQUIRE(corr(1, 1) == 1.0);
}

TEST_CASE("correlation is invariant to row order", "[numerics]") {
  RandomStream rng(47);
  const Matrix obs = random_matrix(25, 5, rng);
  Matrix shuffled = obs;
  // Reverse rows: a permutation.
  for (int i = 0; i < 25; ++i) shuffled.row(i) = obs.row(24 - i);
  const Matrix a = correlation_matrix(obs);
  const Matrix b = correlation_matrix(shuffled);
  REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("correlation of a vote matrix matches its double cast", "[numerics]") {
  VoteMatrix votes(6, 3);
  votes << 1, -1, 1, -1, 1, 1, 1, 1, -1, -1, -1, 1, 1, -1, -1, -1, 1, -1;
  const Matrix direct = correlation_matrix(votes);
  const Matrix casted = votes.cast<double>();
  const Matrix via = correlation_matrix(casted);
  REQUIRE((direct - via).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("correlation requires at least two rows", "[numerics]") {
  Matrix obs(1, 3);
  obs << 1, 2, 3;
  REQUIRE_THROWS_AS(correlation_matrix(obs), std::invalid_argument);
}

TEST_CASE("decompose recovers the identity", "[numerics]") {
  const Matrix eye = Matrix::Identity(5, 5);
  const SpectralDecomposition d = decompose(eye);
  for (int j = 0; j < 5; ++j) REQUIRE_THAT(d.eigenvalues(j), Catch::Matchers::WithinAbs(1.0, 1e-12));
  const Matrix recon = d.eigenvectors * d.eigenvalues.asDiagonal() * d.eigenvectors.transpose();
  REQUIRE((recon - eye).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("decompose recovers a rank-1 spectrum", "[numerics]") {
  Vector v(4);
  v << 1, 2, 3, 4;
  const Matrix m = v * v.transpose();
  const SpectralDecomposition d = decompose(m);
  REQUIRE_THAT(d.eigenvalues(0), Catch::Matchers::WithinAbs(v.squaredNorm(), 1e-9));
  for (int j = 1; j < 4; ++j) REQUIRE(std::abs(d.eigenvalues(j)) < 1e-9);
  // Leading eigenvector is v normalized, oriented positive.
  const Vector lead = d.eigenvectors.col(0);
  REQUIRE_THAT(std::abs(lead.dot(v.normalized())), Catch::Matchers::WithinAbs(1.0, 1e-10));
  Eigen::Index peak = 0;
  lead.cwiseAbs().maxCoeff(&peak);
  REQUIRE(lead(peak) > 0.0);
}

TEST_CASE("decompose reconstructs random positive-semidefinite matrices", "[numerics]") {
  RandomStream rng(2025);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 8 + trial * 7;
    const Matrix b = random_matrix(n, n, rng);
    const Matrix psd = b * b.transpose();
    const SpectralDecomposition d = decompose(psd);
    const Matrix recon =
        d.eigenvectors * d.eigenvalues.asDiagonal() * d.eigenvectors.transpose();
    REQUIRE((recon - psd).cwiseAbs().maxCoeff() <= 1e-8);
    // Orthonormal basis.
    const Matrix gram = d.eigenvectors.transpose() * d.eigenvectors;
    REQUIRE((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    // Descending nonnegative spectrum.
    for (int j = 0; j + 1 < n; ++j) REQUIRE(d.eigenvalues(j) >= d.eigenvalues(j + 1));
    REQUIRE(d.eigenvalues(n - 1) >= 0.0);
    // Deterministic orientation.
    for (int j = 0; j < n; ++j) {
      Eigen::Index peak = 0;
      d.eigenvectors.col(j).cwiseAbs().maxCoeff(&peak);
      REQUIRE(d.eigenvectors(peak, j) >= 0.0);
    }
  }
}

TEST_CASE("decompose rejects non-square and asymmetric input", "[numerics]") {
  REQUIRE_THROWS_AS(decompose(Matrix::Zero(3, 4)), std::invalid_argument);
  Matrix m(2, 2);
  m << 1, 0.5, -0.5, 1;
  REQUIRE_THROWS_AS(decompose(m), std::invalid_argument);
  REQUIRE_THROWS_AS(decompose(Matrix(0, 0)), std::invalid_argument);
}

TEST_CASE("component scores scale eigenvectors by eigenvalues", "[numerics]") {
  RandomStream rng(90);
  const Matrix b = random_matrix(6, 6, rng);
  const Matrix psd = b * b.transpose();
  const SpectralDecomposition d = decompose(psd);
  const Matrix scores = component_scores(d, 2);
  REQUIRE(scores.rows() == 6);
  REQUIRE(scores.cols() == 2);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 2; ++j) {
      REQUIRE_THAT(scores(i, j),
                   Catch::Matchers::WithinAbs(d.eigenvectors(i, j) * d.eigenvalues(j), 1e-14));
    }
  }
  REQUIRE_THROWS_AS(component_scores(d, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(component_scores(d, 7), std::invalid_argument);
  REQUIRE(component_scores(d, 6).cols() == 6);
}

TEST_CASE("agents voting in lockstep share component scores", "[numerics]") {
  // Two blocks of perfectly coordinated voters: the score rows inside a block
  // must coincide, which is exactly what clustering relies on.
  RandomStream rng(424242);
  Matrix obs(200, 6);
  for (int t = 0; t < 200; ++t) {
    const double a = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const double b = rng.bernoulli(0.5) ? 1.0 : -1.0;
    obs(t, 0) = a;
    obs(t, 1) = a;
    obs(t, 2) = a;
    obs(t, 3) = b;
    obs(t, 4) = b;
    obs(t, 5) = b;
  }
  const Matrix scores = component_scores(decompose(correlation_matrix(obs)), 2);
  REQUIRE((scores.row(0) - scores.row(1)).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE((scores.row(0) - scores.row(2)).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE((scores.row(3) - scores.row(4)).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE((scores.row(0) - scores.row(3)).cwiseAbs().maxCoeff() > 0.5);
}
