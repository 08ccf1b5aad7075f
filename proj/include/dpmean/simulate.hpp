#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpmean/stream.hpp"
#include "dpmean/withhold.hpp"

namespace dpmean {

/// Per-step mean squared error against the true mean, averaged over
/// independent trials. Trials run in fixed blocks that are merged in block
/// order, so the result does not depend on the thread schedule or count.
/// An empty `mu` runs the estimator on all-zero data (the pure-noise path)
/// and measures against zero; otherwise coordinate j of each observation
/// is Bernoulli(mu[j]).
std::vector<double> mse_curve_alg1(const EstimatorConfig& cfg, std::span<const double> mu,
                                   std::size_t trials, std::uint64_t seed);

/// Same harness for the withhold-release estimator on a round-robin
/// arrival pattern (n = k * b observations).
std::vector<double> mse_curve_withhold(const WithholdConfig& cfg, std::span<const double> mu,
                                       std::size_t trials, std::uint64_t seed);

/// Cumulative time average: out[t-1] = (1/t) * sum_{s<=t} mse[s-1].
std::vector<double> cumulative_average(std::span<const double> mse);

}  // namespace dpmean
