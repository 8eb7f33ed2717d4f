// SPDX-License-Identifier: Apache-2.0
#include "dualre/bias_stats.hpp"

#include "dualre/errors.hpp"

#include <algorithm>
#include <numeric>

namespace dualre {

InflationReport compute_inflation(std::span<const double> ha_counts, std::size_t ha_texts,
                                  std::span<const double> ds_counts, std::size_t ds_texts, double smoothing) {
  if (ha_texts == 0 || ds_texts == 0) throw ContractError("compute_inflation: empty dataset");
  if (smoothing < 0.0) throw ContractError("compute_inflation: smoothing must be non-negative");
  if (ha_counts.size() != ds_counts.size()) throw ContractError("compute_inflation: relation count mismatch");

  InflationReport report;
  report.ha_text_count = ha_texts;
  report.ds_text_count = ds_texts;
  for (std::size_t r = 0; r < ha_counts.size(); ++r) {
    const double ha = (ha_counts[r] + smoothing) / static_cast<double>(ha_texts);
    const double ds = (ds_counts[r] + smoothing) / static_cast<double>(ds_texts);
    report.ha_freq.push_back(ha);
    report.ds_freq.push_back(ds);
    const bool undefined = ha == 0.0;
    report.flagged.push_back(undefined);
    report.inflation.push_back(undefined ? std::numeric_limits<double>::infinity() : ds / ha);
  }
  return report;
}

namespace {

std::vector<double> relation_counts(const Dataset& data) {
  std::vector<double> counts(static_cast<std::size_t>(data.n_relations), 0.0);
  for (const LabeledExample& ex : data.examples) {
    for (RelationId r : ex.labels.relations) {
      if (r >= 0 && r < data.n_relations) counts[static_cast<std::size_t>(r)] += 1.0;
    }
  }
  return counts;
}

}  // namespace

InflationReport compute_inflation(const Dataset& ha, const Dataset& ds, double smoothing) {
  if (ha.documents.empty() || ds.documents.empty()) throw ContractError("compute_inflation: empty dataset");
  if (ha.n_relations != ds.n_relations) throw ContractError("compute_inflation: datasets disagree on |R|");
  const std::vector<double> ha_counts = relation_counts(ha);
  const std::vector<double> ds_counts = relation_counts(ds);
  return compute_inflation(ha_counts, ha.documents.size(), ds_counts, ds.documents.size(), smoothing);
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::LogNormal: return "log-normal";
    case Family::Weibull: return "weibull";
    case Family::ChiSquare: return "chi-square";
    case Family::Exponential: return "exponential";
    case Family::Normal: return "normal";
  }
  return "unknown";
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw ContractError("regularized_gamma_p: a must be positive");
  if (x <= 0.0) return 0.0;
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // Series.
    double term = 1.0 / a;
    double total = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      total += term;
      if (std::abs(term) < std::abs(total) * 1e-16) break;
    }
    return std::clamp(total * std::exp(log_prefactor), 0.0, 1.0);
  }
  // Continued fraction for Q(a, x) (modified Lentz).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::clamp(1.0 - std::exp(log_prefactor) * h, 0.0, 1.0);
}

double FitResult::cdf(double x) const {
  switch (family) {
    case Family::LogNormal: return lognormal_cdf(x, params[0], params[1]);
    case Family::Weibull: return weibull_cdf(x, params[0], params[1]);
    case Family::ChiSquare: return chi_square_cdf(x, params[0]);
    case Family::Exponential: return exponential_cdf(x, params[0]);
    case Family::Normal: return normal_cdf(x, params[0], params[1]);
  }
  return 0.0;
}

namespace {

struct MeanStd {
  double mean;
  double sd;
};

// Population standard deviation.
MeanStd mean_std(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / n)};
}

std::vector<double> logs_of(std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(std::log(x));
  return out;
}

// Solves 1/k + Σ x^k ln x / Σ x^k - mean(ln x) = 0 for the Weibull shape k.
std::vector<double> fit_weibull(std::span<const double> xs) {
  const std::vector<double> lx = logs_of(xs);
  const MeanStd log_stats = mean_std(lx);
  if (!(log_stats.sd > 1e-12 * std::max(1.0, std::abs(log_stats.mean)))) {
    throw DegenerateFitError("weibull: zero spread in log-samples");
  }
  const double lmax = *std::max_element(lx.begin(), lx.end());

  auto moments = [&](double k, double& ratio1, double& ratio2) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double l : lx) {
      const double w = std::exp(k * (l - lmax));
      s0 += w;
      s1 += w * l;
      s2 += w * l * l;
    }
    ratio1 = s1 / s0;
    ratio2 = s2 / s0;
  };
  auto equation = [&](double k, double& derivative) {
    double r1, r2;
    moments(k, r1, r2);
    derivative = (r2 - r1 * r1) + 1.0 / (k * k);
    return r1 - 1.0 / k - log_stats.mean;
  };

  // The shape equation is increasing in k; keep a bracket for safeguarded Newton.
  double lo = 1e-3, hi = 1e3;
  double k = 1.2 / log_stats.sd;
  k = std::clamp(k, lo * 10, hi / 10);
  for (int it = 0; it < 200; ++it) {
    double deriv;
    const double f = equation(k, deriv);
    if (f > 0) hi = k; else lo = k;
    double next = k - f / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - k) < 1e-13 * k) {
      k = next;
      break;
    }
    k = next;
  }
  double s0 = 0.0;
  for (double l : lx) s0 += std::exp(k * (l - lmax));
  const double scale = std::exp(lmax + std::log(s0 / static_cast<double>(lx.size())) / k);
  return {k, scale};
}

double chi_square_log_likelihood(std::span<const double> xs, double k) {
  const double half = 0.5 * k;
  double ll = 0.0;
  for (double x : xs) ll += (half - 1.0) * std::log(x) - 0.5 * x;
  ll -= static_cast<double>(xs.size()) * (half * std::numbers::ln2 + std::lgamma(half));
  return ll;
}

// Golden-section search on the (concave) log-likelihood over k in (0, 200].
double fit_chi_square(std::span<const double> xs) {
  double a = 1e-6, b = 200.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = chi_square_log_likelihood(xs, c);
  double fd = chi_square_log_likelihood(xs, d);
  while (b - a > 1e-10 * std::max(1.0, a)) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = chi_square_log_likelihood(xs, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = chi_square_log_likelihood(xs, d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

FitResult fit_family(std::span<const double> samples, Family family) {
  if (samples.size() < 2) throw ContractError("fit_family: at least two samples required");
  for (double x : samples) {
    if (!std::isfinite(x)) throw ContractError("fit_family: non-finite sample");
    if (family != Family::Normal && !(x > 0.0)) {
      throw ContractError(std::string("fit_family: ") + std::string(to_string(family)) +
                          " requires strictly positive samples");
    }
  }

  FitResult fit;
  fit.family = family;
  switch (family) {
    case Family::LogNormal: {
      const MeanStd s = mean_std(logs_of(samples));
      if (!(s.sd > 0.0)) throw DegenerateFitError("log-normal: zero variance in log-samples");
      fit.params = {s.mean, s.sd};
      break;
    }
    case Family::Weibull:
      fit.params = fit_weibull(samples);
      break;
    case Family::ChiSquare:
      fit.params = {fit_chi_square(samples)};
      break;
    case Family::Exponential: {
      const double m = mean_std(samples).mean;
      fit.params = {1.0 / m};
      break;
    }
    case Family::Normal: {
      const MeanStd s = mean_std(samples);
      if (!(s.sd > 0.0)) throw DegenerateFitError("normal: zero variance");
      fit.params = {s.mean, s.sd};
      break;
    }
  }
  const KsResult ks = ks_test(samples, [&fit](double x) { return fit.cdf(x); });
  fit.ks_statistic = ks.statistic;
  fit.p_value = ks.p_value;
  return fit;
}

double kolmogorov_p_value(double statistic, std::size_t n) {
  if (n == 0) throw ContractError("kolmogorov_p_value: n must be positive");
  if (statistic <= 0.0) return 1.0;
  const double x = static_cast<double>(n) * statistic * statistic;
  double total = 0.0;
  for (long k = 1; k < 10'000'000; ++k) {
    const double term = std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) * x);
    total += (k % 2 == 1) ? term : -term;
    if (term < 1e-10) break;
  }
  return std::clamp(2.0 * total, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ContractError("ks_test: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = std::abs(static_cast<double>(i + 1) / n - f);
    const double below = std::abs(f - static_cast<double>(i) / n);
    d = std::max({d, above, below});
  }
  d = std::min(d, 1.0);
  return {d, kolmogorov_p_value(d, sorted.size())};
}

FamilyRanking rank_families(std::span<const double> samples) {
  if (samples.size() < 5) throw ContractError("rank_families: at least five samples required");
  FamilyRanking ranking;
  for (Family f : kAllFamilies) {
    try {
      ranking.fits.push_back(fit_family(samples, f));
    } catch (const DegenerateFitError& e) {
      ranking.skipped.emplace_back(f, e.what());
    } catch (const ContractError& e) {
      ranking.skipped.emplace_back(f, e.what());
    }
  }
  if (ranking.fits.empty()) throw DegenerateFitError("rank_families: every family is degenerate on this sample");
  std::stable_sort(ranking.fits.begin(), ranking.fits.end(),
                   [](const FitResult& a, const FitResult& b) { return a.p_value > b.p_value; });
  return ranking;
}

std::vector<int> group_by_inflation(const InflationReport& report, int n_groups) {
  if (n_groups < 1) throw ContractError("group_by_inflation: n_groups must be positive");
  if (report.inflation.empty()) throw ContractError("group_by_inflation: empty report");
  const std::size_t n = report.inflation.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return report.inflation[a] < report.inflation[b]; });

  const std::size_t groups = static_cast<std::size_t>(n_groups);
  const std::size_t base = n / groups;
  const std::size_t extra = n % groups;
  std::vector<int> assignment(n, 0);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k, ++pos) assignment[order[pos]] = static_cast<int>(g);
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (std::isinf(report.inflation[r])) assignment[r] = n_groups - 1;
  }
  return assignment;
}

}  // namespace dualre
