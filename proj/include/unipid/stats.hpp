#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace unipid {

/// Empirical Kendall tau, O(n log n) via merge-sort inversion counting.
/// Assumes tie-free data (copula pseudo-samples are tie-free a.s.).
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// KS statistic against the uniform CDF on (0,1).
double ks_uniform_statistic(std::vector<double> sample);

/// Asymptotic KS critical value at significance alpha (0.01 or 0.05).
double ks_critical_value(std::size_t n, double alpha);

/// Spearman rank correlation (average ranks for ties).
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

/// Pearson correlation.
double pearson_corr(const std::vector<double>& x, const std::vector<double>& y);

/// One-sided sign-test p-value: P(Binomial(n, 1/2) >= k).
double sign_test_pvalue(int k, int n);

}  // namespace unipid
