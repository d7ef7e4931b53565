#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "spikelab/eigen.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/model.hpp"
#include "spikelab/rng.hpp"

using namespace spikelab;

namespace {

Mat random_symmetric(int p, Rng& rng) {
  Mat a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double v = rng.normal();
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

double reconstruction_residual(const Mat& s, const std::vector<eigen::EigenPair>& pairs) {
  const int p = s.rows();
  double res = 0.0;
  for (const auto& pair : pairs) {
    const Vec sv = matvec(s, pair.vector);
    for (int i = 0; i < p; ++i) {
      const double d = sv[i] - pair.value * pair.vector[i];
      res += d * d;
    }
  }
  return std::sqrt(res);
}

double max_orthonormality_defect(const std::vector<eigen::EigenPair>& pairs) {
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = i; j < pairs.size(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::fabs(dot(pairs[i].vector, pairs[j].vector) - target));
    }
  return worst;
}

}  // namespace

TEST_CASE("hand-checkable matrices") {
  // diag(3, 2, 1)
  Mat d(3, 3, 0.0);
  d(0, 0) = 3;
  d(1, 1) = 2;
  d(2, 2) = 1;
  auto pairs = eigen::full_symmetric_eig(d);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].value == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(pairs[1].value == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(pairs[2].value == doctest::Approx(1.0).epsilon(1e-13));

  // [[2,1],[1,2]] has eigenvalues 3 and 1 with vectors (1,1)/sqrt2, (1,-1)/sqrt2
  Mat m(2, 2);
  m(0, 0) = 2;
  m(0, 1) = 1;
  m(1, 0) = 1;
  m(1, 1) = 2;
  pairs = eigen::full_symmetric_eig(m);
  CHECK(pairs[0].value == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(pairs[1].value == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::fabs(pairs[0].vector[0]) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(pairs[0].vector[0] == doctest::Approx(pairs[0].vector[1]).epsilon(1e-12));
}

TEST_CASE("full decomposition of a dense random matrix") {
  Rng rng(4242);
  const Mat s = random_symmetric(50, rng);
  const auto pairs = eigen::full_symmetric_eig(s);
  REQUIRE(pairs.size() == 50);

  for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i - 1].value >= pairs[i].value);
  CHECK(max_orthonormality_defect(pairs) < 1e-10);
  CHECK(reconstruction_residual(s, pairs) < 1e-8 * frobenius_norm(s));

  // trace and Frobenius norm are basis-independent
  double trace = 0.0, sumsq = 0.0;
  for (int i = 0; i < 50; ++i) trace += s(i, i);
  double vsum = 0.0;
  for (const auto& pr : pairs) {
    vsum += pr.value;
    sumsq += pr.value * pr.value;
  }
  CHECK(vsum == doctest::Approx(trace).epsilon(1e-10));
  CHECK(std::sqrt(sumsq) == doctest::Approx(frobenius_norm(s)).epsilon(1e-10));
}

TEST_CASE("decomposition is deterministic") {
  Rng rng(7);
  const Mat s = random_symmetric(24, rng);
  const auto a = eigen::full_symmetric_eig(s);
  const auto b = eigen::full_symmetric_eig(s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == b[i].value);  // bitwise
    for (std::size_t j = 0; j < a[i].vector.size(); ++j) CHECK(a[i].vector[j] == b[i].vector[j]);
  }
}

// Independent oracle: the p x p Gram matrix X^T X / n and the n x n outer
// matrix X X^T / n share their nonzero spectrum exactly. The two decomposition
// paths touch completely different entries, so agreement pins the solver.
TEST_CASE("gram duality oracle") {
  Rng rng(1001);
  const int n = 40, p = 12;
  Mat x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal() * (j == 0 ? 2.0 : 1.0);

  const Mat small = crossprod_scaled(x, 1.0 / n);  // p x p
  Mat big(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < p; ++k) acc += x(i, k) * x(j, k);
      big(i, j) = acc / n;
    }

  const Vec ev_small = eigen::eigenvalues(small);
  const Vec ev_big = eigen::eigenvalues(big);
  REQUIRE((int)ev_small.size() == p);
  REQUIRE((int)ev_big.size() == n);
  for (int k = 0; k < p; ++k)
    CHECK(ev_small[k] == doctest::Approx(ev_big[k]).epsilon(1e-10));
  for (int k = p; k < n; ++k) CHECK(std::fabs(ev_big[k]) < 1e-10);
}

TEST_CASE("repeated eigenvalues keep an orthonormal eigenspace") {
  // Spectrum {5, 5, 5, 1, ..., 1} via an orthogonal similarity
  Rng rng(55);
  const int p = 20;
  const Mat q = eigen::accumulate_q(eigen::tridiagonalize(random_symmetric(p, rng)));
  Mat s(p, p, 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int k = 0; k < p; ++k) acc += q(i, k) * (k < 3 ? 5.0 : 1.0) * q(j, k);
      s(i, j) = acc;
    }

  const auto pairs = eigen::full_symmetric_eig(s);
  for (int k = 0; k < 3; ++k) CHECK(pairs[k].value == doctest::Approx(5.0).epsilon(1e-10));
  for (int k = 3; k < p; ++k) CHECK(pairs[k].value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(max_orthonormality_defect(pairs) < 1e-9);
  CHECK(reconstruction_residual(s, pairs) < 1e-8 * frobenius_norm(s));
}

TEST_CASE("permutation invariance of the spectrum") {
  Rng rng(321);
  const int p = 18;
  const Mat s = random_symmetric(p, rng);
  // reverse-order permutation of rows and columns
  Mat perm(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) perm(i, j) = s(p - 1 - i, p - 1 - j);

  const Vec a = eigen::eigenvalues(s);
  const Vec b = eigen::eigenvalues(perm);
  const double scale = std::fabs(a[0]) + 1.0;
  for (int k = 0; k < p; ++k) CHECK(std::fabs(a[k] - b[k]) < 1e-12 * scale);
}

TEST_CASE("householder pieces are mutually consistent") {
  Rng rng(88);
  const int p = 15;
  const Mat s = random_symmetric(p, rng);
  const auto t = eigen::tridiagonalize(s);
  const Mat q = eigen::accumulate_q(t);

  // apply_q matches the densified Q on a random vector
  Vec w(p);
  for (auto& v : w) v = rng.normal();
  Vec applied = w;
  eigen::apply_q(t, applied);
  const Vec dense = matvec(q, w);
  for (int i = 0; i < p; ++i) CHECK(applied[i] == doctest::Approx(dense[i]).epsilon(1e-12));

  // Q^T S Q reproduces the tridiagonal data
  const Mat sq = matmul(s, q);
  Mat qtsq(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int k = 0; k < p; ++k) acc += q(k, i) * sq(k, j);
      qtsq(i, j) = acc;
    }
  for (int i = 0; i < p; ++i) {
    CHECK(qtsq(i, i) == doctest::Approx(t.d[i]).epsilon(1e-10));
    if (i + 1 < p) {
      CHECK(std::fabs(qtsq(i, i + 1)) == doctest::Approx(std::fabs(t.e[i])).epsilon(1e-10));
      for (int j = i + 2; j < p; ++j) CHECK(std::fabs(qtsq(i, j)) < 1e-10);
    }
  }
}

TEST_CASE("extreme eigenpairs agree with the full decomposition") {
  ModelConfig config;
  config.spikes = {{4.0, 1}, {0.2, 1}};
  config.gamma_sq = 4.0;
  config.n = 600;
  const Mat x = sample_data(config, 2024);
  const Mat s = eigen::sample_covariance(x);

  const auto full = eigen::full_symmetric_eig(s);
  const auto ext = eigen::extreme_eig(s, 2, 1);
  const auto ref = eigen::extremes_from_full(full, 2, 1);

  REQUIRE(ext.top.size() == 2);
  REQUIRE(ext.bottom.size() == 1);
  REQUIRE((int)ext.all_values.size() == s.rows());

  for (int k = 0; k < 2; ++k) {
    CHECK(ext.top[k].value == doctest::Approx(ref.top[k].value).epsilon(1e-10));
    CHECK(std::fabs(dot(ext.top[k].vector, ref.top[k].vector)) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(ext.bottom[0].value == doctest::Approx(ref.bottom[0].value).epsilon(1e-10));
  CHECK(std::fabs(dot(ext.bottom[0].vector, ref.bottom[0].vector)) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK(ext.bulk_min == doctest::Approx(ref.bulk_min).epsilon(1e-10));
  CHECK(ext.bulk_max == doctest::Approx(ref.bulk_max).epsilon(1e-10));

  // extreme values really are extreme relative to the retained bulk
  CHECK(ext.top[1].value >= ext.bulk_max);
  CHECK(ext.bottom[0].value <= ext.bulk_min);

  CHECK_THROWS_AS(eigen::extreme_eig(s, s.rows(), 1), std::invalid_argument);
  CHECK_THROWS_AS(eigen::extreme_eig(s, -1, 0), std::invalid_argument);
}

TEST_CASE("sample covariance guards its shape") {
  Mat wide(5, 9);
  CHECK_THROWS_AS(eigen::sample_covariance(wide), std::invalid_argument);
  Rng rng(3);
  Mat tall(30, 4);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 4; ++j) tall(i, j) = rng.normal();
  const Mat s = eigen::sample_covariance(tall);
  CHECK(s.rows() == 4);
  CHECK(max_abs_diff(s, crossprod_scaled(tall, 1.0 / 30.0)) == 0.0);
}

TEST_CASE("orientation splits vectors against the spike block") {
  // synthetic spectrum with known vectors in R^6, spike block r = 2
  const int p = 6, r = 2;
  eigen::ExtremeSpectrum spectrum;
  spectrum.bulk_min = 0.5;
  spectrum.bulk_max = 2.0;

  eigen::EigenPair top;
  top.value = 5.0;
  top.vector = Vec{-0.8, 0.1, 0.3, 0.2, -0.4, 0.23452078799117149};
  // normalize
  double nrm = norm2(top.vector);
  for (auto& v : top.vector) v /= nrm;
  spectrum.top.push_back(top);

  eigen::EigenPair bottom;
  bottom.value = 0.1;
  bottom.vector = Vec{0.05, 0.9, -0.1, 0.2, 0.1, 0.3};
  nrm = norm2(bottom.vector);
  for (auto& v : bottom.vector) v /= nrm;
  spectrum.bottom.push_back(bottom);

  const auto oriented = eigen::oriented_extremes(spectrum, 1, 1, r);
  REQUIRE(oriented.top.size() == 1);
  REQUIRE(oriented.bottom.size() == 1);

  const auto& t = oriented.top[0];
  CHECK(t.coord == 0);
  CHECK(t.vector[0] >= 0.0);  // sign fixed on the assigned coordinate
  CHECK((int)t.u_hat.size() == r);
  CHECK((int)t.v_hat.size() == p - r);
  // cos identity: u_hat[coord]/sqrt(1+||v_hat||^2) equals the oriented entry
  const double via_split = t.u_hat[t.coord] / std::sqrt(1.0 + norm2(t.v_hat) * norm2(t.v_hat));
  CHECK(t.cos_theta == doctest::Approx(via_split).epsilon(1e-12));
  CHECK(t.cos_theta == doctest::Approx(std::fabs(top.vector[0])).epsilon(1e-12));
  // u_hat is w_u / ||w_u||, so it has unit norm
  CHECK(norm2(t.u_hat) == doctest::Approx(1.0).epsilon(1e-12));

  const auto& b = oriented.bottom[0];
  CHECK(b.coord == r - 1);  // ascending bottom index 0 maps to the last spike coordinate
  CHECK(b.vector[b.coord] >= 0.0);
  CHECK(b.cos_theta == doctest::Approx(std::fabs(bottom.vector[1])).epsilon(1e-12));

  // a vector with (numerically) no spike-block mass cannot be oriented
  eigen::ExtremeSpectrum degenerate;
  eigen::EigenPair flat;
  flat.value = 3.0;
  flat.vector = Vec{1e-9, -1e-9, 0.6, 0.5, 0.4, 0.48083261120685236};
  nrm = norm2(flat.vector);
  for (auto& v : flat.vector) v /= nrm;
  degenerate.top.push_back(flat);
  // spike block of size 1: the first coordinate carries ~1e-9 mass
  CHECK_THROWS_AS(eigen::oriented_extremes(degenerate, 1, 0, 1), DegenerateProjection);

  // r_plus + r_minus must match r
  CHECK_THROWS_AS(eigen::oriented_extremes(spectrum, 1, 0, r), ShapeMismatch);
}

TEST_CASE("values-only helpers") {
  Rng rng(9);
  const Mat s = random_symmetric(12, rng);
  const Vec vals = eigen::eigenvalues(s);
  for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i - 1] >= vals[i]);
  CHECK(eigen::min_eigenvalue(s) == doctest::Approx(vals.back()).epsilon(1e-12));
  Mat empty;
  CHECK_THROWS_AS(eigen::min_eigenvalue(empty), std::invalid_argument);
}

TEST_CASE("reconstruction tolerance is enforced") {
  Rng rng(13);
  const Mat s = random_symmetric(16, rng);
  // an impossible tolerance trips the residual check
  CHECK_THROWS_AS(eigen::full_symmetric_eig(s, 1e-18), NonConvergence);
  // tol = 0 disables the check entirely
  CHECK(eigen::full_symmetric_eig(s, 0.0).size() == 16);
}
