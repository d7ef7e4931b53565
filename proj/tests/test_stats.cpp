#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "spikelab/errors.hpp"
#include "spikelab/rng.hpp"
#include "spikelab/stats.hpp"

using namespace spikelab;

TEST_CASE("mean_cov on a hand-checkable design") {
  // 40 samples over the four sign patterns of (±1, ±2): zero mean, diagonal
  // covariance diag(40/39, 160/39), exactly zero cross-covariance.
  std::vector<Vec> samples;
  for (int rep = 0; rep < 10; ++rep) {
    samples.push_back({1.0, 2.0});
    samples.push_back({-1.0, -2.0});
    samples.push_back({1.0, -2.0});
    samples.push_back({-1.0, 2.0});
  }
  const auto mc = stats::mean_cov(samples);
  CHECK(mc.n == 40);
  CHECK(mc.mean[0] == 0.0);
  CHECK(mc.mean[1] == 0.0);
  CHECK(mc.cov(0, 0) == doctest::Approx(40.0 / 39.0).epsilon(1e-14));
  CHECK(mc.cov(1, 1) == doctest::Approx(160.0 / 39.0).epsilon(1e-14));
  CHECK(mc.cov(0, 1) == doctest::Approx(0.0));
  CHECK(mc.cov(0, 1) == mc.cov(1, 0));
  CHECK(mc.mean_se[0] == doctest::Approx(std::sqrt((40.0 / 39.0) / 40.0)).epsilon(1e-13));
  // x^2 is constant, so the delta-method SE of Var(x) is exactly zero
  CHECK(mc.cov_se(0, 0) == 0.0);
  // xy = ±2 with mean 0: SE = sqrt(E[(xy)^2]/n) = sqrt(4/40)
  CHECK(mc.cov_se(0, 1) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-13));
}

TEST_CASE("mean_cov guards") {
  std::vector<Vec> few(29, Vec{1.0});
  CHECK_THROWS_AS(stats::mean_cov(few), TooFewSamples);

  std::vector<Vec> ragged(40, Vec{1.0, 2.0});
  ragged[17] = Vec{1.0};
  CHECK_THROWS_AS(stats::mean_cov(ragged), ShapeMismatch);

  std::vector<Vec> empty_dim(40, Vec{});
  CHECK_THROWS_AS(stats::mean_cov(empty_dim), ShapeMismatch);
}

TEST_CASE("mean_cov covariance estimate is consistent") {
  // correlated pair (x, x + y) with Var x = 1, Var y = 1: cov matrix
  // [[1, 1], [1, 2]]
  Rng rng(606);
  std::vector<Vec> samples;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    const double x = rng.normal();
    const double y = rng.normal();
    samples.push_back({x, x + y});
  }
  const auto mc = stats::mean_cov(samples);
  CHECK(std::fabs(mc.mean[0]) < 5.0 * mc.mean_se[0]);
  CHECK(std::fabs(mc.mean[1]) < 5.0 * mc.mean_se[1]);
  CHECK(std::fabs(mc.cov(0, 0) - 1.0) < 5.0 * mc.cov_se(0, 0));
  CHECK(std::fabs(mc.cov(0, 1) - 1.0) < 5.0 * mc.cov_se(0, 1));
  CHECK(std::fabs(mc.cov(1, 1) - 2.0) < 5.0 * mc.cov_se(1, 1));
  // the SEs themselves have the right order: sqrt(2/n) for a unit variance
  CHECK(mc.cov_se(0, 0) == doctest::Approx(std::sqrt(2.0 / reps)).epsilon(0.1));
}

TEST_CASE("normality_check calibrates on Gaussian and flags exponential") {
  Rng rng(2020);
  Vec gauss(5000), expo(5000);
  for (int i = 0; i < 5000; ++i) {
    gauss[i] = rng.normal();
    expo[i] = -std::log(1.0 - rng.uniform());
  }
  const auto g = stats::normality_check(gauss);
  CHECK(g.n == 5000);
  CHECK(std::fabs(g.z_skewness) < 5.0);
  CHECK(std::fabs(g.z_kurtosis) < 5.0);

  const auto e = stats::normality_check(expo);
  CHECK(e.skewness > 1.0);          // exponential skewness is 2
  CHECK(e.z_skewness > 10.0);
  CHECK(e.excess_kurtosis > 2.0);   // exponential excess kurtosis is 6

  Vec few(199, 0.5);
  CHECK_THROWS_AS(stats::normality_check(few), TooFewSamples);
  Vec flat(500, 1.25);
  CHECK_THROWS_AS(stats::normality_check(flat), std::invalid_argument);
}

TEST_CASE("compare applies the band and multiplier") {
  std::vector<stats::CompareInput> rows;
  rows.push_back({"on_target", 1.00, 1.0, 0.01, 0.0});
  rows.push_back({"inside_se", 1.04, 1.0, 0.01, 0.0});
  rows.push_back({"outside_se", 1.06, 1.0, 0.01, 0.0});
  rows.push_back({"saved_by_band", 1.06, 1.0, 0.01, 0.02});

  const auto rep = stats::compare(rows, 5.0);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[0].pass);
  CHECK(rep.rows[1].pass);
  CHECK_FALSE(rep.rows[2].pass);
  CHECK(rep.rows[3].pass);
  CHECK_FALSE(rep.pass);  // one failing row fails the report
  CHECK(rep.rows[1].z == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(rep.rows[2].z == doctest::Approx(6.0).epsilon(1e-12));

  // a failing row passes under a larger multiplier: monotonicity
  CHECK(stats::compare(rows, 7.0).pass);
  CHECK_FALSE(stats::compare(rows, 1.0).pass);
  CHECK_THROWS_AS(stats::compare(rows, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(stats::compare(rows, -2.0), std::invalid_argument);
}

TEST_CASE("compare treats zero SE as an exact requirement") {
  std::vector<stats::CompareInput> rows;
  rows.push_back({"exact_match", 2.0, 2.0, 0.0, 0.0});
  rows.push_back({"exact_miss", 2.0, 2.5, 0.0, 0.0});
  rows.push_back({"banded_miss", 2.0, 2.5, 0.0, 1.0});
  const auto rep = stats::compare(rows, 5.0);
  CHECK(rep.rows[0].pass);
  CHECK(rep.rows[0].z == 0.0);
  CHECK_FALSE(rep.rows[1].pass);
  CHECK(std::isinf(rep.rows[1].z));
  CHECK(rep.rows[2].pass);  // the bias band still applies without an SE
}

TEST_CASE("compare_matrices walks the upper triangle") {
  Mat emp(2, 2), th(2, 2), se(2, 2, 0.1);
  emp(0, 0) = 1.0;
  emp(0, 1) = emp(1, 0) = 0.2;
  emp(1, 1) = 2.0;
  th(0, 0) = 1.1;
  th(0, 1) = th(1, 0) = 0.0;
  th(1, 1) = 2.0;

  const auto rep = stats::compare_matrices("cov", emp, th, se, 5.0, 0.0);
  REQUIRE(rep.rows.size() == 3);  // (0,0), (0,1), (1,1)
  CHECK(rep.rows[0].name == "cov[0][0]");
  CHECK(rep.rows[1].name == "cov[0][1]");
  CHECK(rep.rows[2].name == "cov[1][1]");
  CHECK(rep.pass);
  CHECK(rep.rows[0].z == doctest::Approx(-1.0).epsilon(1e-12));

  Mat wrong(3, 3);
  CHECK_THROWS_AS(stats::compare_matrices("cov", emp, wrong, se, 5.0, 0.0), ShapeMismatch);
}

// With exact SEs, a 5-sigma gate on a Gaussian mean is passed essentially
// always (two-sided tail ~ 6e-7). Estimated SEs widen the tails slightly;
// over 500 meta-trials more than 3 failures would signal a broken gate.
TEST_CASE("five-sigma gate calibration") {
  Rng rng(1717);
  int failures = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int r = 100;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < r; ++i) {
      const double x = rng.normal();
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / r;
    const double var = (sumsq - r * mean * mean) / (r - 1);
    const double se = std::sqrt(var / r);
    std::vector<stats::CompareInput> rows;
    rows.push_back({"mean", mean, 0.0, se, 0.0});
    if (!stats::compare(rows, 5.0).pass) ++failures;
  }
  CHECK(failures <= 3);
}

TEST_CASE("median, median_se and sample_variance") {
  Vec odd = {5.0, 1.0, 3.0};
  CHECK(stats::median(odd) == 3.0);
  Vec even = {4.0, 1.0, 3.0, 2.0};
  CHECK(stats::median(even) == doctest::Approx(2.5).epsilon(1e-14));
  Vec empty;
  CHECK_THROWS_AS(stats::median(empty), std::invalid_argument);

  Vec vals = {1.0, 2.0, 3.0, 4.0};  // mean 2.5, unbiased variance 5/3
  CHECK(stats::sample_variance(vals) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  Vec one = {1.0};
  CHECK_THROWS_AS(stats::sample_variance(one), std::invalid_argument);

  CHECK(stats::median_se(vals) ==
        doctest::Approx(1.2533141373155003 * std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-13));

  // calibration: the Gaussian-median SE matches the spread of repeated medians
  Rng rng(808);
  Vec medians;
  const int r = 400;
  Vec sample(r);
  for (int trial = 0; trial < 300; ++trial) {
    for (int i = 0; i < r; ++i) sample[i] = rng.normal();
    medians.push_back(stats::median(sample));
  }
  const double observed_sd = std::sqrt(stats::sample_variance(medians));
  const double predicted = 1.2533141373155003 / std::sqrt(double(r));
  CHECK(observed_sd / predicted == doctest::Approx(1.0).epsilon(0.25));
}
