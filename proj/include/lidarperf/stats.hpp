// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace lidarperf::stats {

/// Frame-paired measurements of the same quantity under two conditions.
struct PairedSample {
  std::vector<double> baseline;
  std::vector<double> variant;
};

enum class Alternative { TwoSided, Greater, Less };

struct WilcoxonResult {
  double p_value = 1.0;
  double z = 0.0;
  double effect_r = 0.0;   // |z| / sqrt(n), n = nonzero differences
  double w_plus = 0.0;     // rank sum of positive differences
  std::size_t n_used = 0;  // pairs with a nonzero difference
  bool exact = false;      // exact null distribution vs normal approximation
};

/// Wilcoxon signed-rank test on variant - baseline differences. Zero
/// differences are excluded and ties share average ranks. For n <= 25 the
/// p-value comes from the exact null distribution (all 2^n sign
/// assignments); larger n uses the normal approximation with continuity
/// correction. Throws DegenerateSampleError when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample,
                                    Alternative alternative = Alternative::TwoSided);

enum class EffectMagnitude { Negligible, Small, Medium, Large };

std::string to_string(EffectMagnitude m);

/// Romano cutoffs: |delta| < 0.147 negligible, < 0.33 small, < 0.474 medium,
/// else large.
EffectMagnitude magnitude_label(double delta);

struct CliffsDelta {
  double delta = 0.0;  // in [-1, 1]
  EffectMagnitude magnitude = EffectMagnitude::Negligible;
};

/// delta = (#(variant_i > baseline_j) - #(variant_i < baseline_j)) / (n*m)
/// over all cross pairs.
CliffsDelta cliffs_delta(const std::vector<double>& baseline,
                         const std::vector<double>& variant);

}  // namespace lidarperf::stats
