// SPDX-License-Identifier: Apache-2.0
//
// Labeling-bias statistics: per-relation inflation between distantly
// supervised and human-annotated data, maximum-likelihood fits of candidate
// distributions to an inflation sample, Kolmogorov-Smirnov ranking, and
// inflation groups.
#pragma once

#include "dualre/corpus.hpp"

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace dualre {

struct InflationReport {
  /// inflation[r] = ds_freq[r] / ha_freq[r]; +inf when the HA frequency is zero.
  std::vector<double> inflation;
  /// Relations whose inflation is the +inf sentinel.
  std::vector<bool> flagged;
  /// Labels per text, including smoothing.
  std::vector<double> ha_freq;
  std::vector<double> ds_freq;
  std::size_t ha_text_count = 0;
  std::size_t ds_text_count = 0;

  std::size_t size() const { return inflation.size(); }
};

/// inflation(r) = ((ds_count(r) + s) / ds_texts) / ((ha_count(r) + s) / ha_texts).
InflationReport compute_inflation(std::span<const double> ha_counts, std::size_t ha_texts,
                                  std::span<const double> ds_counts, std::size_t ds_texts, double smoothing = 0.0);

/// Counts relation labels (NA excluded) over each dataset's examples; texts are documents.
InflationReport compute_inflation(const Dataset& ha, const Dataset& ds, double smoothing = 0.0);

enum class Family { LogNormal, Weibull, ChiSquare, Exponential, Normal };

inline constexpr Family kAllFamilies[] = {Family::LogNormal, Family::Weibull, Family::ChiSquare, Family::Exponential,
                                          Family::Normal};

std::string_view to_string(Family family);

struct FitResult {
  Family family = Family::Normal;
  /// log-normal {μ, σ}; weibull {shape, scale}; chi-square {k}; exponential {rate}; normal {mean, std}.
  std::vector<double> params;
  double ks_statistic = 1.0;
  double p_value = 0.0;

  double cdf(double x) const;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Distribution functions.

template <std::floating_point S>
S normal_cdf(S x, S mean, S sd) {
  return S(0.5) * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2_v<S>));
}

template <std::floating_point S>
S lognormal_cdf(S x, S mu, S sigma) {
  return x <= S(0) ? S(0) : normal_cdf(std::log(x), mu, sigma);
}

template <std::floating_point S>
S lognormal_log_likelihood(std::span<const S> xs, S mu, S sigma) {
  S ll = 0;
  for (S x : xs) {
    const S z = (std::log(x) - mu) / sigma;
    ll += -std::log(x) - std::log(sigma) - S(0.5) * std::log(S(2) * std::numbers::pi_v<S>) - S(0.5) * z * z;
  }
  return ll;
}

template <std::floating_point S>
S weibull_cdf(S x, S shape, S scale) {
  return x <= S(0) ? S(0) : -std::expm1(-std::pow(x / scale, shape));
}

template <std::floating_point S>
S exponential_cdf(S x, S rate) {
  return x <= S(0) ? S(0) : -std::expm1(-rate * x);
}

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

inline double chi_square_cdf(double x, double k) {
  return x <= 0.0 ? 0.0 : regularized_gamma_p(0.5 * k, 0.5 * x);
}

/// Maximum-likelihood fit; ks_statistic/p_value are filled by ks_test against the fitted CDF.
FitResult fit_family(std::span<const double> samples, Family family);

/// D = max_i max(|i/n - F(x_i)|, |F(x_i) - (i-1)/n|) with the asymptotic Kolmogorov p-value.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

/// p = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² n D²), truncated when terms fall below 1e-10, clamped to [0, 1].
double kolmogorov_p_value(double statistic, std::size_t n);

struct FamilyRanking {
  /// Sorted by descending p-value.
  std::vector<FitResult> fits;
  /// Families that could not be fitted, with the reason.
  std::vector<std::pair<Family, std::string>> skipped;
};

FamilyRanking rank_families(std::span<const double> samples);

/// Relations sorted by inflation split into contiguous near-equal buckets; the
/// first (n mod g) buckets take one extra relation and +inf sentinels always
/// land in the last bucket. Result is indexed by relation id.
std::vector<int> group_by_inflation(const InflationReport& report, int n_groups);

}  // namespace dualre
