#include "spikelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace spikelab::stats {

MeanCov mean_cov(const std::vector<Vec>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 30) {
    throw TooFewSamples("mean_cov needs at least 30 samples, got " + std::to_string(n));
  }
  const std::size_t k = samples.front().size();
  for (const Vec& s : samples) {
    if (s.size() != k) throw ShapeMismatch("mean_cov: samples have inconsistent dimension");
  }
  if (k == 0) throw ShapeMismatch("mean_cov: zero-dimensional samples");

  MeanCov out;
  out.n = n;
  out.mean.assign(k, 0.0);
  for (const Vec& s : samples) {
    for (std::size_t a = 0; a < k; ++a) out.mean[a] += s[a];
  }
  for (std::size_t a = 0; a < k; ++a) out.mean[a] /= n;

  // Centered second moments (biased, divisor n) and the mixed fourth moments
  // needed for the delta-method SE of each covariance entry:
  //   Var(c_ab) ~ (E[xa xb xa xb] - c_ab^2) / n   with centered x.
  Mat m2(k, k);
  Mat m22(k, k);
  Vec centered(k);
  for (const Vec& s : samples) {
    for (std::size_t a = 0; a < k; ++a) centered[a] = s[a] - out.mean[a];
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a; b < k; ++b) {
        const double prod = centered[a] * centered[b];
        m2(a, b) += prod;
        m22(a, b) += prod * prod;
      }
    }
  }
  out.cov = Mat(k, k);
  out.cov_se = Mat(k, k);
  out.mean_se.assign(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      const double c_biased = m2(a, b) / n;
      out.cov(a, b) = m2(a, b) / (n - 1);
      out.cov(b, a) = out.cov(a, b);
      const double fourth = m22(a, b) / n;
      const double var_of_cov = std::max(0.0, fourth - c_biased * c_biased) / n;
      out.cov_se(a, b) = std::sqrt(var_of_cov);
      out.cov_se(b, a) = out.cov_se(a, b);
    }
    out.mean_se[a] = std::sqrt(std::max(0.0, out.cov(a, a)) / n);
  }
  return out;
}

NormalityReport normality_check(const Vec& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 200) {
    throw TooFewSamples("normality_check needs at least 200 samples, got " + std::to_string(n));
  }
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0) {
    throw std::invalid_argument("normality_check: samples have zero variance");
  }
  NormalityReport rep;
  rep.n = n;
  rep.skewness = m3 / std::pow(m2, 1.5);
  rep.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  rep.z_skewness = rep.skewness / std::sqrt(6.0 / n);
  rep.z_kurtosis = rep.excess_kurtosis / std::sqrt(24.0 / n);
  return rep;
}

ComparisonReport compare(const std::vector<CompareInput>& rows, double se_multiplier) {
  if (!(se_multiplier > 0.0)) {
    throw std::invalid_argument("compare: se_multiplier must be positive");
  }
  ComparisonReport rep;
  rep.se_multiplier = se_multiplier;
  rep.rows.reserve(rows.size());
  for (const CompareInput& in : rows) {
    CompareRow row;
    row.name = in.name;
    row.empirical = in.empirical;
    row.theory = in.theory;
    row.se = in.se;
    row.bias_band = in.bias_band;
    const double dev = std::fabs(in.empirical - in.theory);
    row.z = (in.se > 0.0) ? (in.empirical - in.theory) / in.se : (dev > 0.0 ? HUGE_VAL : 0.0);
    row.pass = dev <= se_multiplier * in.se + in.bias_band;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

ComparisonReport compare_matrices(const std::string& prefix, const Mat& empirical,
                                  const Mat& theory, const Mat& se, double se_multiplier,
                                  double bias_band) {
  if (empirical.rows() != theory.rows() || empirical.cols() != theory.cols() ||
      empirical.rows() != se.rows() || empirical.cols() != se.cols()) {
    throw ShapeMismatch("compare_matrices: dimension mismatch between empirical/theory/se");
  }
  std::vector<CompareInput> rows;
  for (std::size_t i = 0; i < static_cast<std::size_t>(empirical.rows()); ++i) {
    for (std::size_t j = i; j < static_cast<std::size_t>(empirical.cols()); ++j) {
      CompareInput in;
      in.name = prefix + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      in.empirical = empirical(i, j);
      in.theory = theory(i, j);
      in.se = se(i, j);
      in.bias_band = bias_band;
      rows.push_back(std::move(in));
    }
  }
  return compare(rows, se_multiplier);
}

double median(Vec values) {
  if (values.empty()) throw std::invalid_argument("median of empty sample");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (n % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + (mid - 1), values.begin() + mid);
  return 0.5 * (values[mid - 1] + hi);
}

double sample_variance(const Vec& values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("sample_variance needs at least 2 values");
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : values) {
    const double d = x - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(n - 1);
}

double median_se(const Vec& values) {
  // Asymptotic SE of the sample median for an approximately Gaussian sample:
  // sqrt(pi/2) * sd / sqrt(R).
  const double sd = std::sqrt(sample_variance(values));
  return 1.2533141373155003 * sd / std::sqrt(static_cast<double>(values.size()));
}

}  // namespace spikelab::stats
