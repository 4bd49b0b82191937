#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rif {

// ---------------------------------------------------------------------------
// Special functions for p-values.
// ---------------------------------------------------------------------------

namespace detail {

inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// Regularized upper incomplete gamma Q(a,x) = P(Gamma(a) > x).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_contfrac(a, x);
}

// Survival function of chi^2 with `dof` degrees of freedom.
inline double chi2_sf(double x, double dof) { return gamma_q(dof / 2.0, x / 2.0); }

// Kolmogorov distribution tail via the alternating series, with the Stephens
// small-sample correction folded into lambda.
inline double ks_pvalue(double d, size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k & 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    s += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::min(1.0, std::max(0.0, s));
}

// ---------------------------------------------------------------------------
// Test reports.
// ---------------------------------------------------------------------------

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  size_t n = 0;
  uint64_t seed = 0;
  bool pass = false;
  std::string detail;
};

// Chi-square GOF of integer counts against Poisson(rate); tail buckets are
// merged until every cell expects at least 5.
inline TestReport poisson_gof(const std::vector<uint32_t>& counts, double rate, double level = 0.01,
                              uint64_t seed = 0) {
  if (counts.size() < 1000) throw std::invalid_argument("poisson_gof: need at least 1e3 counts");
  uint32_t kmax = 0;
  for (uint32_t c : counts) kmax = std::max(kmax, c);
  std::vector<double> expected;
  const double n = static_cast<double>(counts.size());
  double p = std::exp(-rate);
  double cum = 0.0;
  for (uint32_t k = 0; k <= kmax; ++k) {
    expected.push_back(n * p);
    cum += p;
    p *= rate / (k + 1);
  }
  expected.push_back(n * std::max(0.0, 1.0 - cum));  // tail k > kmax
  std::vector<double> observed(expected.size(), 0.0);
  for (uint32_t c : counts) observed[c] += 1.0;

  // merge the upper tail until expected >= 5
  while (expected.size() > 2 && expected.back() < 5.0) {
    expected[expected.size() - 2] += expected.back();
    observed[observed.size() - 2] += observed.back();
    expected.pop_back();
    observed.pop_back();
  }
  // merge low cells forward if needed (tiny rates put mass at 0 anyway)
  double chi2 = 0.0;
  int cells = 0;
  double opool = 0.0, epool = 0.0;
  for (size_t i = 0; i < expected.size(); ++i) {
    opool += observed[i];
    epool += expected[i];
    if (epool >= 5.0) {
      chi2 += (opool - epool) * (opool - epool) / epool;
      ++cells;
      opool = epool = 0.0;
    }
  }
  if (epool > 0.0 && cells > 0) chi2 += (opool - epool) * (opool - epool) / std::max(epool, 1e-9);
  TestReport r;
  r.name = "poisson_gof";
  r.statistic = chi2;
  r.n = counts.size();
  r.seed = seed;
  const int dof = std::max(1, cells - 1);
  r.p_value = chi2_sf(chi2, dof);
  r.pass = r.p_value > level;
  r.detail = "rate=" + std::to_string(rate) + " cells=" + std::to_string(cells);
  return r;
}

// KS against a cdf.
template <class Cdf>
TestReport ks_test(std::vector<double> xs, Cdf cdf, const std::string& name, double level = 0.01,
                   uint64_t seed = 0) {
  if (xs.size() < 1000) throw std::invalid_argument("ks: need at least 1e3 samples");
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  const double n = static_cast<double>(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
  }
  TestReport r;
  r.name = name;
  r.statistic = d;
  r.n = xs.size();
  r.seed = seed;
  r.p_value = ks_pvalue(d, xs.size());
  r.pass = r.p_value > level;
  return r;
}

inline TestReport exp1_ks(std::vector<double> xs, double level = 0.01, uint64_t seed = 0) {
  return ks_test(std::move(xs), [](double x) { return 1.0 - std::exp(-x); }, "exp1_ks", level, seed);
}

inline TestReport uniform_ks(std::vector<double> xs, double level = 0.01, uint64_t seed = 0) {
  return ks_test(std::move(xs), [](double x) { return std::min(1.0, std::max(0.0, x)); }, "uniform_ks",
                 level, seed);
}

// Generic chi-square against given category probabilities (merging cells with
// expected < 5 into a pooled remainder).
inline TestReport chi2_categories(const std::vector<double>& observed, const std::vector<double>& probs,
                                  const std::string& name, double level = 0.01) {
  if (observed.size() != probs.size()) throw std::invalid_argument("chi2: size mismatch");
  double n = 0.0;
  for (double o : observed) n += o;
  double chi2 = 0.0;
  int cells = 0;
  double opool = 0.0, epool = 0.0;
  double ptot = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    ptot += probs[i];
    const double e = n * probs[i];
    if (e >= 5.0) {
      chi2 += (observed[i] - e) * (observed[i] - e) / e;
      ++cells;
    } else {
      opool += observed[i];
      epool += e;
    }
  }
  const double etail = epool + n * std::max(0.0, 1.0 - ptot);
  const double otail = opool;
  if (etail >= 5.0) {
    chi2 += (otail - etail) * (otail - etail) / etail;
    ++cells;
  }
  TestReport r;
  r.name = name;
  r.statistic = chi2;
  r.n = static_cast<size_t>(n);
  const int dof = std::max(1, cells - 1);
  r.p_value = chi2_sf(chi2, dof);
  r.pass = r.p_value > level;
  r.detail = "cells=" + std::to_string(cells);
  return r;
}

// Empirical total-variation distance between two ensembles of discrete keys.
inline double tv_keys(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, std::pair<double, double>> hist;
  for (const auto& k : a) hist[k].first += 1.0;
  for (const auto& k : b) hist[k].second += 1.0;
  double tv = 0.0;
  for (const auto& [k, c] : hist) tv += std::abs(c.first / a.size() - c.second / b.size());
  return 0.5 * tv;
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
  size_t n = 0;
  double sem() const { return std::sqrt(var / n); }
};

inline MeanVar mean_var(const std::vector<double>& xs) {
  MeanVar mv;
  mv.n = xs.size();
  double s = 0.0;
  for (double x : xs) s += x;
  mv.mean = s / xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - mv.mean) * (x - mv.mean);
  mv.var = xs.size() > 1 ? v / (xs.size() - 1) : 0.0;
  return mv;
}

}  // namespace rif
