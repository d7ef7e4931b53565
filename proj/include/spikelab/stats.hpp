#pragma once

#include <string>
#include <vector>

#include "spikelab/errors.hpp"
#include "spikelab/linalg.hpp"

namespace spikelab::stats {

// Empirical mean and unbiased covariance of K-dimensional samples, with
// standard errors: SE(mean) from the sample variance, SE(covariance entries)
// from the fourth-moment (delta-method) estimator.
struct MeanCov {
  Vec mean;
  Vec mean_se;
  Mat cov;
  Mat cov_se;
  int n = 0;
};
MeanCov mean_cov(const std::vector<Vec>& samples);  // requires >= 30 samples

// Moment-based Gaussianity diagnostics with asymptotic standard errors
// sqrt(6/R) and sqrt(24/R).
struct NormalityReport {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double z_skewness = 0.0;
  double z_kurtosis = 0.0;
  int n = 0;
};
NormalityReport normality_check(const Vec& samples);  // requires >= 200 samples

// One theory-vs-empirical verdict. Pass iff
//   |empirical - theory| <= se_multiplier * se + bias_band.
// z is the deviation in SE units (0 when se is zero and the values agree).
struct CompareInput {
  std::string name;
  double empirical = 0.0;
  double theory = 0.0;
  double se = 0.0;
  double bias_band = 0.0;
};

struct CompareRow {
  std::string name;
  double empirical = 0.0;
  double theory = 0.0;
  double se = 0.0;
  double bias_band = 0.0;
  double z = 0.0;
  bool pass = true;
};

struct ComparisonReport {
  std::vector<CompareRow> rows;
  double se_multiplier = 5.0;
  bool pass = true;
};

ComparisonReport compare(const std::vector<CompareInput>& rows, double se_multiplier = 5.0);

// Flattened entrywise comparison of two same-shape matrices (e.g. empirical
// covariance vs a theory tensor) with per-entry SEs and a common bias band.
// Only the upper triangle including the diagonal is compared. Row names are
// "<prefix>[i][j]". Throws ShapeMismatch when dimensions disagree.
ComparisonReport compare_matrices(const std::string& prefix, const Mat& empirical,
                                  const Mat& theory, const Mat& se, double se_multiplier,
                                  double bias_band);

double median(Vec values);                 // by value: the input is partially sorted
double median_se(const Vec& values);       // 1.2533 * sd / sqrt(R), Gaussian asymptotics
double sample_variance(const Vec& values); // unbiased

}  // namespace spikelab::stats
