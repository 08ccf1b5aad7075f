#pragma once

#include <cstddef>

#include "dpmean/dense.hpp"
#include "dpmean/plan.hpp"
#include "dpmean/toeplitz.hpp"

namespace dpmean {

/// Participation schema for user-level privacy: any two contributions of
/// one user are at least b steps apart, and a user contributes at most k
/// times. By default k is the largest count the separation permits,
/// ceil(n/b); it can be pinned lower to match a fixed participation budget.
struct ParticipationPattern {
    std::size_t n = 1;
    std::size_t b = 1;
    std::size_t k = 1;

    ParticipationPattern(std::size_t n_, std::size_t b_);
    static ParticipationPattern with_max_participations(std::size_t n, std::size_t b, std::size_t k);
    /// Derive b = ceil(n/k) from a target participation count.
    static ParticipationPattern from_target_k(std::size_t n, std::size_t k);

    bool single_participation() const { return k == 1; }

private:
    ParticipationPattern() = default;
};

/// Largest l2 column norm of LTT(c); for a lower-triangular Toeplitz matrix
/// this is the norm of the first column.
double sens_single(const ToeplitzSeries& c);

/// True when the coefficients are non-negative and non-increasing, the
/// hypothesis of the exact strided-column-sum formula. Benign floating-point
/// wobble up to tol is forgiven.
bool sens_exact_admissible(const ToeplitzSeries& c, double tol = 1e-12);

/// Exact multi-participation sensitivity for admissible series:
/// the l2 norm of the sum of columns 0, b, 2b, ... (at most k of them).
/// Throws precondition_error for inadmissible input; callers should fall
/// back to sens_enumerate at small n.
double sens_min_sep(const ToeplitzSeries& c, const ParticipationPattern& pattern);

/// Combinatorial upper bound: max over index sets with pairwise gaps >= b
/// and size <= k of sqrt(sum_{i,j in set} |(C^T C)_{ij}|). Exact equal to
/// the sensitivity when C^T C is entrywise non-negative. Exponential in n;
/// capped at n <= 24.
double sens_enumerate(const DenseMatrix& C, const ParticipationPattern& pattern);

/// Dispatch: exact formula when admissible, enumeration when n <= 24,
/// otherwise precondition_error.
double sens_for_plan(const FactorizationPlan& plan, const ParticipationPattern& pattern);

}  // namespace dpmean
