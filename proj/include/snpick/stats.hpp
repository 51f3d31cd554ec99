#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include "snpick/errors.hpp"

namespace snpick {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw config_error("mean of an empty sample");
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// n-1 denominator, matching how spreads are reported alongside means
inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2)
    throw config_error("sample variance needs at least two values, got " +
                       std::to_string(v.size()));
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

inline double sample_sd(const std::vector<double>& v) {
  return std::sqrt(sample_variance(v));
}

struct FTestResult {
  double ratio = 0.0;  // var(a) / var(b)
  double p_value = 1.0;
  double df1 = 0.0;
  double df2 = 0.0;
};

// Two-sided F-test for equality of variances.
inline FTestResult variance_f_test(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  const double va = sample_variance(a);
  const double vb = sample_variance(b);
  if (vb == 0.0)
    throw config_error("variance ratio undefined: second sample is constant");
  FTestResult r;
  r.ratio = va / vb;
  r.df1 = static_cast<double>(a.size() - 1);
  r.df2 = static_cast<double>(b.size() - 1);
  const boost::math::fisher_f dist(r.df1, r.df2);
  const double lower = boost::math::cdf(dist, r.ratio);
  r.p_value = std::min(1.0, 2.0 * std::min(lower, 1.0 - lower));
  return r;
}

}  // namespace snpick
