#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "dpmean/toeplitz.hpp"

namespace dpmean {

enum class FactorKind { Identity, SqrtPrefix, NuDpFtrl, MeanAware };
enum class BandingMode { NotBanded, Banded, BandedInverse };

std::string to_string(FactorKind k);
std::string to_string(BandingMode m);
FactorKind parse_kind(const std::string& s);
BandingMode parse_banding(const std::string& s);

/// A factorization of the running-mean workload A = B * C with C lower
/// triangular Toeplitz. Stored in series form:
///   c     — first column of C
///   c_inv — first column of C^{-1}
///   a     — prefix sums of c_inv, i.e. the first column of E1 * C^{-1}.
/// Row t of B = D * LTT(a) is (a_{t-1}, ..., a_0, 0, ...) / t. The same
/// a-series also gives B for the prefix-sum workload E1 = B * C (no D).
struct FactorizationPlan {
    ToeplitzSeries c;
    ToeplitzSeries c_inv;
    ToeplitzSeries a;
    FactorKind kind = FactorKind::Identity;
    BandingMode banding = BandingMode::NotBanded;
    std::optional<std::size_t> bandwidth;  // nullopt = full
    std::optional<double> nu;

    std::size_t n() const { return c.size(); }
    std::string label() const;
};

/// Assemble a plan. Bandwidth is required for Banded / BandedInverse modes;
/// nu is required for NuDpFtrl. Closed-form inverses are used where known
/// (all four base kinds), so a NotBanded plan costs O(n); banded modes cost
/// O(n * p) through the band-aware inversion.
FactorizationPlan build_plan(FactorKind kind, BandingMode banding, std::size_t n,
                             std::optional<std::size_t> p = std::nullopt,
                             std::optional<double> nu = std::nullopt);

}  // namespace dpmean
