// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/stats.hpp"

#include <algorithm>
#include <cmath>

#include "lidarperf/error.hpp"

namespace lidarperf::stats {

namespace {

constexpr std::size_t kExactLimit = 25;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Average ranks of |d|, with ties sharing their mean rank. Returns ranks in
/// the input order plus the tie-group sizes (for the variance correction).
std::pair<std::vector<double>, std::vector<std::size_t>> average_ranks(
    const std::vector<double>& abs_values) {
  const std::size_t n = abs_values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return abs_values[a] < abs_values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::vector<std::size_t> tie_sizes;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && abs_values[order[j]] == abs_values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    tie_sizes.push_back(j - i);
    i = j;
  }
  return {ranks, tie_sizes};
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample,
                                    Alternative alternative) {
  if (sample.baseline.size() != sample.variant.size())
    throw ParameterError("wilcoxon: samples must be index-paired");
  if (sample.baseline.empty())
    throw ParameterError("wilcoxon: empty sample");

  std::vector<double> diffs;
  diffs.reserve(sample.baseline.size());
  for (std::size_t i = 0; i < sample.baseline.size(); ++i) {
    const double d = sample.variant[i] - sample.baseline[i];
    if (!std::isfinite(d)) throw ParameterError("wilcoxon: non-finite value");
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n == 0)
    throw DegenerateSampleError("wilcoxon: all paired differences are zero");

  std::vector<double> abs_diffs(n);
  for (std::size_t i = 0; i < n; ++i) abs_diffs[i] = std::abs(diffs[i]);
  const auto [ranks, tie_sizes] = average_ranks(abs_diffs);

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0.0) w_plus += ranks[i];

  // normal approximation statistics (also used for the effect size r)
  const double dn = static_cast<double>(n);
  const double mean_w = dn * (dn + 1.0) / 4.0;
  double tie_term = 0.0;
  for (const std::size_t t : tie_sizes) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double var_w =
      dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term / 48.0;
  const double sd_w = std::sqrt(std::max(var_w, 0.0));

  WilcoxonResult result;
  result.w_plus = w_plus;
  result.n_used = n;
  if (sd_w > 0.0) {
    const double centered = w_plus - mean_w;
    const double cc = centered > 0.0 ? -0.5 : (centered < 0.0 ? 0.5 : 0.0);
    result.z = (centered + cc) / sd_w;
  }
  result.effect_r = std::abs(result.z) / std::sqrt(dn);

  if (n <= kExactLimit) {
    result.exact = true;
    // doubled ranks are integers even with .5 average ranks; distribution of
    // doubled W+ over all 2^n sign assignments by dynamic programming
    std::vector<long long> dranks(n);
    long long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dranks[i] = std::llround(2.0 * ranks[i]);
      total += dranks[i];
    }
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    long long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      reach += dranks[i];
      for (long long s = reach; s >= dranks[i]; --s)
        count[static_cast<std::size_t>(s)] +=
            count[static_cast<std::size_t>(s - dranks[i])];
    }
    const double denom = std::pow(2.0, dn);
    const long long w2 = std::llround(2.0 * w_plus);
    double p_ge = 0.0, p_le = 0.0;
    for (long long s = 0; s <= total; ++s) {
      const double c = count[static_cast<std::size_t>(s)];
      if (s >= w2) p_ge += c;
      if (s <= w2) p_le += c;
    }
    p_ge /= denom;
    p_le /= denom;
    switch (alternative) {
      case Alternative::Greater: result.p_value = p_ge; break;
      case Alternative::Less: result.p_value = p_le; break;
      case Alternative::TwoSided:
        result.p_value = std::min(1.0, 2.0 * std::min(p_ge, p_le));
        break;
    }
  } else {
    const double centered = w_plus - mean_w;
    switch (alternative) {
      case Alternative::Greater:
        result.p_value = 1.0 - normal_cdf((centered - 0.5) / sd_w);
        break;
      case Alternative::Less:
        result.p_value = normal_cdf((centered + 0.5) / sd_w);
        break;
      case Alternative::TwoSided:
        result.p_value = 2.0 * (1.0 - normal_cdf(std::abs(result.z)));
        break;
    }
    result.p_value = std::clamp(result.p_value, 0.0, 1.0);
  }
  return result;
}

std::string to_string(EffectMagnitude m) {
  switch (m) {
    case EffectMagnitude::Negligible: return "negligible";
    case EffectMagnitude::Small: return "small";
    case EffectMagnitude::Medium: return "medium";
    case EffectMagnitude::Large: return "large";
  }
  return "unknown";
}

EffectMagnitude magnitude_label(double delta) {
  const double a = std::abs(delta);
  if (a < 0.147) return EffectMagnitude::Negligible;
  if (a < 0.33) return EffectMagnitude::Small;
  if (a < 0.474) return EffectMagnitude::Medium;
  return EffectMagnitude::Large;
}

CliffsDelta cliffs_delta(const std::vector<double>& baseline,
                         const std::vector<double>& variant) {
  if (baseline.empty() || variant.empty())
    throw ParameterError("cliffs_delta: samples must be nonempty");
  std::vector<double> sorted = baseline;
  std::sort(sorted.begin(), sorted.end());
  long long net = 0;
  for (const double v : variant) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v);
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v);
    const long long less_than_v = lo - sorted.begin();      // baseline_j < v
    const long long greater_than_v = sorted.end() - hi;     // baseline_j > v
    net += less_than_v - greater_than_v;
  }
  CliffsDelta result;
  result.delta = static_cast<double>(net) /
                 (static_cast<double>(baseline.size()) *
                  static_cast<double>(variant.size()));
  result.magnitude = magnitude_label(result.delta);
  return result;
}

}  // namespace lidarperf::stats
