#include "unipid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "unipid/pseudoobs.hpp"

namespace unipid {

namespace {

// Counts inversions by merge sort; v is overwritten.
std::size_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                             std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::size_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<long>(lo), buf.begin() + static_cast<long>(hi),
            v.begin() + static_cast<long>(lo));
  return inv;
}

}  // namespace

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("kendall_tau: bad input");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> buf(n);
  const double inv = static_cast<double>(count_inversions(ys, buf, 0, n));
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * inv / pairs;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_uniform_statistic(std::vector<double> sample) {
  return ks_statistic(std::move(sample), [](double x) { return x; });
}

double ks_critical_value(std::size_t n, double alpha) {
  // Asymptotic: c(alpha) / sqrt(n) with c = sqrt(-0.5 * ln(alpha/2)).
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c / std::sqrt(static_cast<double>(n));
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson_corr(rank_to_unit(x), rank_to_unit(y));
}

double pearson_corr(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("pearson_corr: bad input");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double sign_test_pvalue(int k, int n) {
  // Exact binomial tail at p = 1/2, summed in log space.
  double p = 0.0;
  for (int i = k; i <= n; ++i) {
    double log_c = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    p += std::exp(log_c - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

}  // namespace unipid
