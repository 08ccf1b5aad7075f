#pragma once

// The n = 8196 benchmark table: step-n error of every factorization kind
// under the three banding modes at k in {4, 16, 64}, with embedded
// reference values and comparison tolerances.

#include <array>
#include <cstddef>
#include <vector>

#include "dpmean/plan.hpp"

namespace dpmean {

inline constexpr std::size_t kTableN = 8196;
inline constexpr double kTableTol = 0.002;    // fixed-factorization rows
inline constexpr double kTableTolNu = 0.003;  // rows that optimize over nu

struct TableCell {
    BandingMode banding;
    FactorKind kind;
    std::size_t k = 0;
    std::size_t b = 0;
    std::size_t p = 0;  // 0 = not banded
    double nu = 0.0;    // 0 unless kind == NuDpFtrl
    double value = 0.0;
    double golden = 0.0;
    double tolerance = 0.0;

    bool within_tolerance() const;
};

/// Bandwidth convention of the benchmark table: b for the mean-aware and
/// decayed kinds, floor(ln b) for the banded square-root kind and
/// ceil(log2 b) for its banded-inverse variant; 0 when not banded.
std::size_t default_bandwidth(FactorKind kind, BandingMode banding, std::size_t b);

/// Compute all 30 cells (10 rows x 3 participation counts). The table pins
/// the participation count k and uses b = floor(n/k); bandwidths follow
/// default_bandwidth. These choices reproduce the reference values; see the
/// README for the full convention.
std::vector<TableCell> compute_error_table(std::size_t n = kTableN);

}  // namespace dpmean
