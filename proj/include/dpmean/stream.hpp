#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpmean/dense.hpp"
#include "dpmean/error.hpp"
#include "dpmean/plan.hpp"
#include "dpmean/sensitivity.hpp"

namespace dpmean {

enum class ClipMode { Reject, Clip };

struct EstimatorConfig {
    PrivacyBudget budget;
    ParticipationPattern pattern;
    std::size_t bandwidth = 1;  // p: how many noise vectors are retained
    std::size_t dim = 1;
    ClipMode clip_mode = ClipMode::Reject;
    std::uint64_t seed = 1;
    FactorKind kind = FactorKind::MeanAware;  // correlation family (banded-inverse applied)
    std::optional<double> nu;
    bool noiseless = false;  // test hook: sigma = 0

    EstimatorConfig(PrivacyBudget b, ParticipationPattern p, std::size_t bandwidth_,
                    std::size_t dim_)
        : budget(b), pattern(p), bandwidth(bandwidth_), dim(dim_) {}
};

/// Bounded-memory private running-mean estimator. Precomputes the mixing
/// coefficients (the first p coefficients of C^{-1} for the banded-inverse
/// plan of the configured kind), the multi-participation sensitivity of the
/// resulting correlation series, and the noise scale sigma. Each step draws
/// one fresh Gaussian vector, mixes it with the last p draws, adds the
/// result to the data vector and releases the running mean. Memory is
/// O(p*d) independent of the stream length.
class StreamingMeanEstimator {
public:
    explicit StreamingMeanEstimator(EstimatorConfig cfg);

    /// Process x_t and return the released mean estimate. Throws when the
    /// declared stream length is exhausted (the sensitivity precomputation
    /// is only valid for n steps) or, in Reject mode, when ||x|| exceeds
    /// the clip norm.
    std::vector<double> observe(std::span<const double> x);

    std::size_t step() const { return t_; }
    double sigma() const { return sigma_; }
    double sensitivity() const { return sens_; }
    std::size_t retained_noise_vectors() const { return std::min(t_, cfg_.bandwidth); }
    const FactorizationPlan& plan() const { return plan_; }
    const EstimatorConfig& config() const { return cfg_; }

private:
    EstimatorConfig cfg_;
    FactorizationPlan plan_;
    std::vector<double> mix_;   // c_inv[0..p-1]
    std::vector<double> sum_;   // running sum of perturbed inputs
    std::vector<double> ring_;  // p x d ring of noise vectors
    double sens_ = 0.0;
    double sigma_ = 0.0;
    std::size_t t_ = 0;
};

/// The noise matrix the streaming estimator would draw: row t-1, column j
/// holds the step-t draw for coordinate j, scaled by sigma.
DenseMatrix streaming_noise_matrix(const EstimatorConfig& cfg);

/// Dense offline evaluation of A*X + B*Z for the same plan the streaming
/// estimator uses. Test-scale oracle (n <= 4096): with Z equal to the
/// streaming draws the two outputs agree to rounding.
DenseMatrix offline_recompose(const EstimatorConfig& cfg, const DenseMatrix& X,
                              const DenseMatrix& Z);

}  // namespace dpmean
