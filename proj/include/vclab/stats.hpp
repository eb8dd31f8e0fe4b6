#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vclab {

struct SampleSummary {
  double mean, variance, std_error;
  int n;
};

inline SampleSummary summarize(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("empty sample");
  const int n = static_cast<int>(xs.size());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var = n > 1 ? var / (n - 1) : 0.0;
  return SampleSummary{mean, var, std::sqrt(var / n), n};
}

// two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty KS sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

// critical value c(alpha) * sqrt((n+m)/(n m)) with c = sqrt(-ln(alpha/2)/2)
inline double ks_critical(double alpha, size_t n, size_t m) {
  const double c = std::sqrt(-std::log(alpha / 2) / 2);
  return c * std::sqrt((static_cast<double>(n + m)) /
                       (static_cast<double>(n) * static_cast<double>(m)));
}

}  // namespace vclab
