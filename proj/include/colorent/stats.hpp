#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace colorent {

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Mean with the naive iid standard error.
Estimate mean_iid(std::span<const double> samples);

/**
 * Mean of an autocorrelated series with a blocking (pairwise block doubling)
 * error estimate. Levels are kept while at least 16 blocks remain; the first
 * level whose successor does not rise by more than its own uncertainty is the
 * plateau, otherwise the largest estimate seen is reported.
 */
Estimate mean_blocked(std::span<const double> series);

/// Unbiased k-statistics k_1..k_max_order (max_order <= 8).
std::vector<double> k_statistics(std::span<const double> samples, int max_order);

/// k-statistics with delete-one-block jackknife standard errors.
std::vector<Estimate> k_statistics_jackknife(std::span<const double> samples, int max_order,
                                             std::size_t blocks = 100);

}  // namespace colorent
