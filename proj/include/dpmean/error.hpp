#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dpmean/plan.hpp"
#include "dpmean/sensitivity.hpp"

namespace dpmean {

/// Gaussian-mechanism noise multiplier sqrt(2 ln(1.25/delta)) / epsilon.
/// Requires epsilon > 0 and delta in (0, 1).
double gaussian_scale(double epsilon, double delta);

struct PrivacyBudget {
    double epsilon = 1.0;
    double delta = 1e-6;
    double clip_norm = 1.0;  // l2 bound on each data vector

    PrivacyBudget() = default;
    PrivacyBudget(double eps, double del, double xi);

    double noise_multiplier() const;  // gaussian_scale(epsilon, delta)
    /// Gaussian-mechanism calibration is only formally valid for epsilon
    /// and delta in (0, 1); larger epsilon still runs but callers should
    /// surface a warning.
    bool formal_regime() const { return epsilon < 1.0 && delta < 1.0; }
};

struct ErrorReport {
    std::size_t t = 0;
    double error = 0.0;        // frob_prefix * sensitivity / sqrt(t)
    double frob_prefix = 0.0;  // ||B_{:t}||_F
    double sensitivity = 0.0;
    double per_step_std = 0.0;  // sigma * xi * sens * ||b_t||, 0 without a budget
};

/// ||B_{:t}||_F = sqrt(sum_{m<=t} (1/m^2) sum_{j<m} a_j^2), one running sum.
double frob_prefix(const FactorizationPlan& plan, std::size_t t);

/// ||b_t||_2 = sqrt(sum_{j<t} a_j^2) / t, the t-th row norm of B.
double row_norm(const FactorizationPlan& plan, std::size_t t);

/// The budget-free error functional at step t together with its pieces.
/// Sensitivity resolves through sens_for_plan (exact formula when the
/// series is admissible, enumeration at n <= 24 otherwise).
ErrorReport error_at(const FactorizationPlan& plan, const ParticipationPattern& pattern,
                     std::size_t t, const std::optional<PrivacyBudget>& budget = std::nullopt);

/// error_at over an ascending grid of steps, computed in one O(n) pass.
std::vector<ErrorReport> error_curve(const FactorizationPlan& plan,
                                     const ParticipationPattern& pattern,
                                     std::span<const std::size_t> t_grid,
                                     const std::optional<PrivacyBudget>& budget = std::nullopt);

/// Factorization-independent floor on the step-n error:
/// (1/sqrt(n)) * sqrt(sum_j (min(ceil(j/b), k)/j)^2); the min is inactive
/// when k = ceil(n/b).
double error_lower_bound(const ParticipationPattern& pattern);

struct NuSearchResult {
    double nu = 0.5;
    double error = 0.0;
};

/// Minimize the step-n error of the exponentially decayed square-root
/// factorization over nu: geometric grid of 200 points in
/// [1e-4, 1 - 1e-4], then one golden-section refinement around the best
/// grid point. Grid evaluations run in parallel. Banding is fixed first
/// and nu optimized for it.
NuSearchResult optimize_nu(BandingMode banding, const ParticipationPattern& pattern,
                           std::optional<std::size_t> p);

}  // namespace dpmean
