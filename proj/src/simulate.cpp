#include "dpmean/simulate.hpp"

#include <cmath>
#include <cstdint>

#include "dpmean/rng.hpp"
#include "dpmean/util.hpp"

namespace dpmean {

namespace {

constexpr std::size_t kBlocks = 64;

// Runs `body(trial, acc)` for every trial, accumulating per-step squared
// errors into fixed per-block buffers merged in block order. Exceptions
// cannot unwind an OpenMP region, so the first failure is captured and
// rethrown after the loop.
template <typename Body>
std::vector<double> blocked_mse(std::size_t n, std::size_t trials, const Body& body) {
    if (trials == 0) throw precondition_error("mse curve: trials must be >= 1");
    const std::size_t blocks = std::min(kBlocks, trials);
    std::vector<std::vector<double>> partial(blocks, std::vector<double>(n, 0.0));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(blocks); ++bi) {
        try {
            auto& acc = partial[static_cast<std::size_t>(bi)];
            for (std::size_t trial = static_cast<std::size_t>(bi); trial < trials; trial += blocks) {
                body(trial, acc);
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        KahanSum s;
        for (std::size_t bi = 0; bi < blocks; ++bi) s.add(partial[bi][t]);
        out[t] = s.value() / static_cast<double>(trials);
    }
    return out;
}

double bernoulli_draw(std::uint64_t trial_seed, std::size_t t, std::size_t j, double p) {
    return uniform01(trial_seed, kDomainSyntheticData, t + 1, j) < p ? 1.0 : 0.0;
}

}  // namespace

std::vector<double> mse_curve_alg1(const EstimatorConfig& cfg, std::span<const double> mu,
                                   std::size_t trials, std::uint64_t seed) {
    const std::size_t n = cfg.pattern.n;
    const std::size_t d = cfg.dim;
    if (!mu.empty() && mu.size() != d) throw precondition_error("mse_curve_alg1: mu dimension mismatch");
    return blocked_mse(n, trials, [&](std::size_t trial, std::vector<double>& acc) {
        const std::uint64_t trial_seed = derive_seed(seed, trial);
        EstimatorConfig tc = cfg;
        tc.seed = derive_seed(trial_seed, 0x5eed);
        StreamingMeanEstimator est(tc);
        std::vector<double> x(d, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            if (!mu.empty()) {
                for (std::size_t j = 0; j < d; ++j) x[j] = bernoulli_draw(trial_seed, t, j, mu[j]);
            }
            const std::vector<double> est_t = est.observe(x);
            double e2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = est_t[j] - (mu.empty() ? 0.0 : mu[j]);
                e2 += diff * diff;
            }
            acc[t] += e2;
        }
    });
}

std::vector<double> mse_curve_withhold(const WithholdConfig& cfg, std::span<const double> mu,
                                       std::size_t trials, std::uint64_t seed) {
    const std::size_t n = cfg.users * cfg.max_participations;
    const std::size_t d = cfg.dim;
    if (!mu.empty() && mu.size() != d) throw precondition_error("mse_curve_withhold: mu dimension mismatch");
    const std::vector<int> arrivals = round_robin_pattern(n, static_cast<int>(cfg.users));
    return blocked_mse(n, trials, [&](std::size_t trial, std::vector<double>& acc) {
        const std::uint64_t trial_seed = derive_seed(seed, trial);
        WithholdConfig tc = cfg;
        tc.seed = derive_seed(trial_seed, 0x5eed);
        WithholdReleaseEstimator est(tc);
        std::vector<double> x(d, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            if (!mu.empty()) {
                for (std::size_t j = 0; j < d; ++j) x[j] = bernoulli_draw(trial_seed, t, j, mu[j]);
            }
            const std::vector<double> est_t = est.observe(arrivals[t], x);
            double e2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = est_t[j] - (mu.empty() ? 0.0 : mu[j]);
                e2 += diff * diff;
            }
            acc[t] += e2;
        }
    });
}

std::vector<double> cumulative_average(std::span<const double> mse) {
    std::vector<double> out(mse.size());
    KahanSum s;
    for (std::size_t t = 0; t < mse.size(); ++t) {
        s.add(mse[t]);
        out[t] = s.value() / static_cast<double>(t + 1);
    }
    return out;
}

}  // namespace dpmean
