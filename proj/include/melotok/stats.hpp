#pragma once

// Distribution similarity and paired hypothesis testing over per-melody
// metric samples: Gaussian kernel density estimates with a Scott-rule
// bandwidth, Overlapping Area, exact 1-Wasserstein distance, the Wilcoxon
// signed-rank test and the Holm-Bonferroni multiple-test adjustment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "melotok/errors.hpp"
#include "melotok/metrics.hpp"

namespace melotok {

namespace detail {

inline double sampleMean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double sampleSd(const std::vector<double>& xs) {
  const double mean = sampleMean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double normalCdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace detail

// Scott's rule of thumb for one-dimensional data, narrowed by a further
// factor of four so that multimodal metric distributions are not smoothed
// into a single hump.
inline double scottBandwidth(const std::vector<double>& samples) {
  if (samples.size() < 2) {
    throw StatsError("bandwidth needs at least 2 samples");
  }
  const double sd = detail::sampleSd(samples);
  if (sd <= 0.0) {
    throw StatsError("bandwidth undefined for zero-variance samples");
  }
  return sd * std::pow(static_cast<double>(samples.size()), -0.2) / 4.0;
}

struct KdeModel {
  std::vector<double> samples;
  double bandwidth = 0.0;
};

inline KdeModel makeKde(std::vector<double> samples) {
  KdeModel model;
  model.bandwidth = scottBandwidth(samples);
  model.samples = std::move(samples);
  return model;
}

inline double kdePdf(const KdeModel& model, double x) {
  if (model.samples.empty() || model.bandwidth <= 0.0) {
    throw StatsError("kde model is not initialised");
  }
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  double sum = 0.0;
  for (double s : model.samples) {
    const double t = (x - s) / model.bandwidth;
    sum += std::exp(-0.5 * t * t);
  }
  return kInvSqrt2Pi * sum /
         (model.bandwidth * static_cast<double>(model.samples.size()));
}

// Trapezoid integral of min(pdf_a, pdf_b) over a 2,048-point grid spanning
// all samples plus six bandwidths on each side, where the Gaussian tails
// carry negligible mass.
inline double overlappingArea(const KdeModel& a, const KdeModel& b) {
  constexpr int kGridPoints = 2048;
  const double pad = 6.0 * std::max(a.bandwidth, b.bandwidth);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const KdeModel* model : {&a, &b}) {
    for (double s : model->samples) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  lo -= pad;
  hi += pad;
  const double step = (hi - lo) / (kGridPoints - 1);
  double prev = std::min(kdePdf(a, lo), kdePdf(b, lo));
  double area = 0.0;
  for (int i = 1; i < kGridPoints; ++i) {
    const double x = lo + step * static_cast<double>(i);
    const double cur = std::min(kdePdf(a, x), kdePdf(b, x));
    area += 0.5 * (prev + cur) * step;
    prev = cur;
  }
  return std::clamp(area, 0.0, 1.0);
}

// Exact W1 between two empirical distributions: the area between their
// piecewise-constant CDFs. For equal-size inputs this reduces to the mean
// absolute difference of the sorted samples.
inline double wasserstein1(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) {
    throw StatsError("wasserstein distance needs non-empty samples");
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double prev = 0.0;
  bool started = false;
  double area = 0.0;
  while (i < xs.size() || j < ys.size()) {
    double v = std::numeric_limits<double>::infinity();
    if (i < xs.size()) v = xs[i];
    if (j < ys.size()) v = std::min(v, ys[j]);
    if (started) {
      area += std::fabs(static_cast<double>(i) / nx -
                        static_cast<double>(j) / ny) *
              (v - prev);
    }
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    prev = v;
    started = true;
  }
  return area;
}

struct WilcoxonResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int usable_pairs = 0;
  bool exact = false;
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped, tied magnitudes share average ranks and the statistic is the
// smaller of the signed rank sums. The p-value is exact (full enumeration of
// sign assignments, computed by convolution) up to 20 usable pairs and a
// tie-corrected normal approximation with continuity correction beyond that.
inline WilcoxonResult wilcoxonSignedRank(const std::vector<double>& a,
                                         const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw StatsError("paired test needs equal-length samples");
  }
  std::vector<double> diffs;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) diffs.push_back(a[k] - b[k]);
  }
  const int m = static_cast<int>(diffs.size());
  if (m < 5) {
    throw StatsError("fewer than 5 nonzero differences");
  }

  std::vector<int> order(diffs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return std::fabs(diffs[x]) < std::fabs(diffs[y]);
  });
  std::vector<double> ranks(diffs.size());
  double tie_term = 0.0;
  for (int lo = 0; lo < m;) {
    int hi = lo;
    while (hi < m &&
           std::fabs(diffs[order[hi]]) == std::fabs(diffs[order[lo]])) {
      ++hi;
    }
    const double avg_rank = static_cast<double>(lo + 1 + hi) / 2.0;
    for (int k = lo; k < hi; ++k) ranks[order[k]] = avg_rank;
    const double t = static_cast<double>(hi - lo);
    tie_term += t * t * t - t;
    lo = hi;
  }

  double w_plus = 0.0;
  for (int k = 0; k < m; ++k) {
    if (diffs[k] > 0.0) w_plus += ranks[k];
  }
  const double total = static_cast<double>(m) * (m + 1) / 2.0;
  const double w_lo = std::min(w_plus, total - w_plus);

  WilcoxonResult result;
  result.statistic = w_lo;
  result.usable_pairs = m;
  if (m <= 20) {
    result.exact = true;
    // Work with doubled ranks so average ranks become integers.
    const int total2 = m * (m + 1);
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    for (int k = 0; k < m; ++k) {
      const int r2 = static_cast<int>(std::llround(2.0 * ranks[k]));
      for (int s = total2; s >= r2; --s) counts[s] += counts[s - r2];
    }
    const int w2 = static_cast<int>(std::llround(2.0 * w_lo));
    double tail = 0.0;
    for (int s = 0; s <= total2; ++s) {
      if (s <= w2 || s >= total2 - w2) tail += counts[s];
    }
    result.p_value = std::min(1.0, tail / std::pow(2.0, m));
  } else {
    const double mean = static_cast<double>(m) * (m + 1) / 4.0;
    const double var =
        static_cast<double>(m) * (m + 1) * (2.0 * m + 1.0) / 24.0 -
        tie_term / 48.0;
    const double z = (w_lo - mean + 0.5) / std::sqrt(var);
    result.p_value = std::clamp(2.0 * detail::normalCdf(z), 0.0, 1.0);
  }
  return result;
}

struct HolmDecision {
  double p_value = 1.0;
  double adjusted_alpha = 0.0;
  bool rejected = false;
};

// Step-down Holm-Bonferroni procedure: visit p-values in ascending order
// against thresholds alpha/m, alpha/(m-1), ... and stop rejecting at the
// first failure. Decisions are returned in the input order.
inline std::vector<HolmDecision> holmBonferroni(
    const std::vector<double>& p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0,1)");
  }
  std::vector<std::size_t> order(p_values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return p_values[x] < p_values[y]; });
  std::vector<HolmDecision> decisions(p_values.size());
  bool rejecting = true;
  for (std::size_t k = 0; k < order.size(); ++k) {
    HolmDecision& decision = decisions[order[k]];
    decision.p_value = p_values[order[k]];
    decision.adjusted_alpha = alpha / static_cast<double>(order.size() - k);
    if (rejecting && decision.p_value <= decision.adjusted_alpha) {
      decision.rejected = true;
    } else {
      rejecting = false;
    }
  }
  return decisions;
}

namespace detail {

inline double betaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kEps = 3e-14;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const int m2 = 2 * it;
    double aa = it * (b - it) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + it) * (qab + it) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw StatsError("incomplete beta did not converge");
}

inline double regularizedIncompleteBeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) +
                           std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * betaContinuedFraction(b, a, 1.0 - x) / b;
}

}  // namespace detail

struct TTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int pairs = 0;
};

// Two-sided paired t-test, offered as an alternative to the signed-rank
// test. The p-value comes from the regularized incomplete beta function.
inline TTestResult pairedTTest(const std::vector<double>& a,
                               const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw StatsError("paired test needs equal-length samples");
  }
  if (a.size() < 2) {
    throw StatsError("paired t-test needs at least 2 pairs");
  }
  std::vector<double> diffs(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) diffs[k] = a[k] - b[k];
  const double n = static_cast<double>(diffs.size());
  const double mean = detail::sampleMean(diffs);
  const double sd = detail::sampleSd(diffs);
  if (sd <= 0.0) {
    throw StatsError("paired t-test undefined for constant differences");
  }
  TTestResult result;
  result.pairs = static_cast<int>(diffs.size());
  result.statistic = mean / (sd / std::sqrt(n));
  const double df = n - 1.0;
  const double t2 = result.statistic * result.statistic;
  result.p_value = detail::regularizedIncompleteBeta(df / 2.0, 0.5, df / (df + t2));
  return result;
}

struct TestOutcome {
  std::string metric_name;
  double statistic = 0.0;
  double p_value = 1.0;
  double adjusted_alpha = 0.0;
  bool rejected = false;
};

struct DistributionComparison {
  MetricId metric = kMai;
  std::optional<double> oa;
  std::optional<double> w1;
  int n_model = 0;
  int n_reference = 0;
};

// Per-metric distribution comparison between two report sets. Absent metric
// values are skipped; a metric with fewer than two defined values on either
// side is reported with blank oa and w1. A zero-variance side has no density
// estimate, so its overlap stays blank while w1 is still reported.
inline std::vector<DistributionComparison> compareSets(
    const std::vector<MetricReport>& model,
    const std::vector<MetricReport>& reference) {
  if (model.empty() || reference.empty()) {
    throw StatsError("comparison needs non-empty report sets");
  }
  std::vector<DistributionComparison> rows;
  rows.reserve(kMetricCount);
  for (int metric = 0; metric < kMetricCount; ++metric) {
    DistributionComparison row;
    row.metric = static_cast<MetricId>(metric);
    std::vector<double> xs;
    std::vector<double> ys;
    for (const MetricReport& report : model) {
      if (report.values[metric]) xs.push_back(*report.values[metric]);
    }
    for (const MetricReport& report : reference) {
      if (report.values[metric]) ys.push_back(*report.values[metric]);
    }
    row.n_model = static_cast<int>(xs.size());
    row.n_reference = static_cast<int>(ys.size());
    if (xs.size() >= 2 && ys.size() >= 2) {
      row.w1 = wasserstein1(xs, ys);
      try {
        row.oa = overlappingArea(makeKde(std::move(xs)), makeKde(std::move(ys)));
      } catch (const StatsError&) {
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace melotok
