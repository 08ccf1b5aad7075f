#include "dpmean/stream.hpp"

#include <cmath>

#include "dpmean/rng.hpp"
#include "dpmean/util.hpp"

namespace dpmean {

StreamingMeanEstimator::StreamingMeanEstimator(EstimatorConfig cfg) : cfg_(cfg) {
    const std::size_t n = cfg_.pattern.n;
    if (cfg_.dim == 0) throw precondition_error("StreamingMeanEstimator: dim must be >= 1");
    if (cfg_.bandwidth < 1 || cfg_.bandwidth > n) {
        throw precondition_error("StreamingMeanEstimator: bandwidth must lie in [1, n]");
    }
    plan_ = build_plan(cfg_.kind, BandingMode::BandedInverse, n, cfg_.bandwidth, cfg_.nu);
    // The exact sensitivity formula needs non-negative, non-increasing
    // coefficients. The mean-aware correlation series is proven to satisfy
    // this; other kinds are validated here (sens_min_sep throws otherwise).
    sens_ = sens_min_sep(plan_.c, cfg_.pattern);
    sigma_ = cfg_.noiseless ? 0.0 : cfg_.budget.noise_multiplier() * cfg_.budget.clip_norm * sens_;

    mix_.assign(plan_.c_inv.c.begin(), plan_.c_inv.c.begin() + static_cast<long>(cfg_.bandwidth));
    sum_.assign(cfg_.dim, 0.0);
    ring_.assign(cfg_.bandwidth * cfg_.dim, 0.0);
}

std::vector<double> StreamingMeanEstimator::observe(std::span<const double> x) {
    const std::size_t d = cfg_.dim;
    if (x.size() != d) throw precondition_error("observe: dimension mismatch");
    if (t_ >= cfg_.pattern.n) {
        throw precondition_error("observe: stream exhausted (estimator calibrated for n steps)");
    }

    double scale = 1.0;
    const double norm = l2_norm(x);
    if (norm > cfg_.budget.clip_norm) {
        if (cfg_.clip_mode == ClipMode::Reject) {
            throw precondition_error("observe: ||x|| exceeds the clip norm in reject mode");
        }
        scale = cfg_.budget.clip_norm / norm;
    }

    const std::size_t t1 = t_ + 1;  // 1-based step
    const std::size_t p = cfg_.bandwidth;
    double* z_t = ring_.data() + (t_ % p) * d;
    for (std::size_t j = 0; j < d; ++j) {
        z_t[j] = sigma_ * gaussian(cfg_.seed, kDomainStreamNoise, t1, j);
    }

    std::vector<double> out(d);
    const std::size_t mix_terms = std::min(p - 1, t_) + 1;  // j = 0 .. min(p-1, t-1)
    for (std::size_t j = 0; j < mix_terms; ++j) {
        const double* z = ring_.data() + ((t_ - j) % p) * d;
        const double g = mix_[j];
        for (std::size_t m = 0; m < d; ++m) out[m] += g * z[m];
    }
    for (std::size_t m = 0; m < d; ++m) {
        sum_[m] += x[m] * scale + out[m];
        out[m] = sum_[m] / static_cast<double>(t1);
    }
    ++t_;
    return out;
}

DenseMatrix streaming_noise_matrix(const EstimatorConfig& cfg) {
    StreamingMeanEstimator probe(cfg);  // reuse sigma computation
    DenseMatrix Z(cfg.pattern.n, cfg.dim);
    for (std::size_t t = 0; t < cfg.pattern.n; ++t) {
        for (std::size_t j = 0; j < cfg.dim; ++j) {
            Z.at(t, j) = probe.sigma() * gaussian(cfg.seed, kDomainStreamNoise, t + 1, j);
        }
    }
    return Z;
}

DenseMatrix offline_recompose(const EstimatorConfig& cfg, const DenseMatrix& X,
                              const DenseMatrix& Z) {
    const std::size_t n = cfg.pattern.n;
    const std::size_t d = cfg.dim;
    if (n > kDenseCap) throw precondition_error("offline_recompose: capped at n = 4096");
    if (X.rows != n || X.cols != d || Z.rows != n || Z.cols != d) {
        throw precondition_error("offline_recompose: shape mismatch");
    }
    FactorizationPlan plan = build_plan(cfg.kind, BandingMode::BandedInverse, n, cfg.bandwidth, cfg.nu);

    // A*X: exact running means of the data.
    DenseMatrix out(n, d);
    std::vector<double> run(d, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            run[j] += X.at(t, j);
            out.at(t, j) = run[j] / static_cast<double>(t + 1);
        }
    }
    // B*Z row by row: row t of B is (a_{t-1}, ..., a_0, 0, ...) / t.
    for (std::size_t t = 1; t <= n; ++t) {
        const double w = 1.0 / static_cast<double>(t);
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = 1; i <= t; ++i) s += plan.a[t - i] * Z.at(i - 1, j);
            out.at(t - 1, j) += w * s;
        }
    }
    return out;
}

}  // namespace dpmean
