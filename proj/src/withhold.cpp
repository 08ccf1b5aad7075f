#include "dpmean/withhold.hpp"

#include <algorithm>
#include <cmath>

#include "dpmean/error.hpp"
#include "dpmean/rng.hpp"
#include "dpmean/sensitivity.hpp"
#include "dpmean/util.hpp"

namespace dpmean {

std::vector<std::vector<int>> greedy_bin_covering(std::span<const long long> counts, long long m) {
    if (m <= 0) throw precondition_error("greedy_bin_covering: m must be > 0");
    std::vector<std::vector<int>> bins;
    std::vector<int> current;
    long long filled = 0;
    for (std::size_t u = 0; u < counts.size(); ++u) {
        current.push_back(static_cast<int>(u));
        filled += std::min(counts[u], m);
        if (filled >= m) {
            bins.push_back(std::move(current));
            current.clear();
            filled = 0;
        }
    }
    return bins;  // the trailing unclosed bin is dropped
}

std::map<long long, double> stable_histogram(std::span<const double> values, double half_width,
                                             double epsilon, double delta, std::uint64_t seed,
                                             std::uint64_t stream) {
    if (!(half_width > 0.0)) throw precondition_error("stable_histogram: bucket half width must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
        throw precondition_error("stable_histogram: epsilon and delta must lie in (0, 1)");
    }
    std::map<long long, long long> counts;
    for (double v : values) {
        const auto k = static_cast<long long>(std::floor((v + half_width) / (2.0 * half_width)));
        ++counts[k];
    }
    const double scale = gaussian_scale(epsilon, delta);
    const double threshold = 1.0 + scale * std::sqrt(2.0 * std::log(2.0 / delta));
    std::map<long long, double> scores;
    for (const auto& [bucket, count] : counts) {
        const double noise = scale * gaussian(seed, kDomainHistogramNoise, stream,
                                              static_cast<std::uint64_t>(bucket));
        const double score = static_cast<double>(count) + noise;
        if (score >= threshold) scores[bucket] = score;
    }
    return scores;
}

double ProjectionBox::l2_diameter() const {
    if (unbounded()) throw precondition_error("ProjectionBox: unbounded box has no diameter");
    return 2.0 * half_width * std::sqrt(static_cast<double>(center.size()));
}

void ProjectionBox::project(std::span<double> x) const {
    if (unbounded()) return;
    if (x.size() != center.size()) throw precondition_error("ProjectionBox: dimension mismatch");
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = std::clamp(x[j], center[j] - half_width, center[j] + half_width);
    }
}

ProjectionBox projection_interval(const DenseMatrix& Y, double tau_prime, double tau,
                                  double epsilon, double delta, std::uint64_t seed,
                                  std::uint64_t stream) {
    if (Y.rows < 1) throw precondition_error("projection_interval: need at least one crude average");
    if (!(tau_prime > 0.0) || !(tau > 0.0)) throw precondition_error("projection_interval: radii must be > 0");
    const std::size_t d = Y.cols;
    const double eps_c = epsilon / std::sqrt(8.0 * d * std::log(2.0 / delta));
    const double delta_c = delta / (2.0 * d);

    std::vector<double> center(d, 0.0);
    std::vector<double> column(Y.rows);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < Y.rows; ++i) column[i] = Y.at(i, j);
        const auto scores =
            stable_histogram(column, tau_prime, eps_c, delta_c, seed, stream * 0x10000u + j);
        long long best_bucket = 0;
        double best_score = 0.0;
        bool found = false;
        for (const auto& [bucket, score] : scores) {  // ascending order: ties keep lowest
            if (!found || score > best_score) {
                best_bucket = bucket;
                best_score = score;
                found = true;
            }
        }
        center[j] = found ? 2.0 * static_cast<double>(best_bucket) * tau_prime : 0.0;
    }
    return ProjectionBox::centered(std::move(center), 2.0 * tau_prime + tau);
}

long long min_crude_count(long long levels_L, double eps, double delta, double gamma) {
    if (levels_L < 1) throw precondition_error("min_crude_count: need L >= 1");
    if (!(eps > 0.0) || !(delta > 0.0) || !(gamma > 0.0 && gamma < 1.0)) {
        throw precondition_error("min_crude_count: bad parameters");
    }
    const double dl = static_cast<double>(levels_L);
    auto lhs = [&](long long K) {
        const double kd = static_cast<double>(K);
        const double first = 2.0 * dl * kd * std::exp(eps) / delta * std::exp(-eps * kd / 64.0);
        const double second = 2.0 * dl * std::exp(-kd / 2048.0);
        return first + second;
    };
    if (lhs(4) <= gamma) return 4;
    long long hi = 8;
    while (lhs(hi) > gamma) {
        hi *= 2;
        if (hi > (1LL << 60)) throw precondition_error("min_crude_count: no feasible K");
    }
    long long lo = hi / 2;  // lhs(lo) > gamma >= lhs(hi)
    while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        if (lhs(mid) <= gamma) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

namespace {
bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }
std::size_t log2_exact(long long v) {
    std::size_t l = 0;
    while ((1LL << l) < v) ++l;
    return l;
}
}  // namespace

WithholdReleaseEstimator::WithholdReleaseEstimator(WithholdConfig cfg) : cfg_(std::move(cfg)) {
    const std::size_t b = cfg_.users;
    const std::size_t k = cfg_.max_participations;
    const std::size_t d = cfg_.dim;
    if (b < 1 || k < 1 || d < 1) throw precondition_error("WithholdReleaseEstimator: bad shape");
    if (!(cfg_.epsilon > 0.0 && cfg_.epsilon < 1.0) || !(cfg_.delta > 0.0 && cfg_.delta < 1.0)) {
        throw precondition_error("WithholdReleaseEstimator: epsilon and delta must lie in (0, 1)");
    }
    if (!(cfg_.zeta > 0.0)) {
        throw precondition_error("WithholdReleaseEstimator: zeta (sub-Gaussian proxy) must be > 0");
    }
    gamma_ = cfg_.gamma > 0.0 ? cfg_.gamma : 0.05 / static_cast<double>(d);

    if (cfg_.plan) {
        plan_ = *cfg_.plan;
        if (plan_.n() != b) throw precondition_error("WithholdReleaseEstimator: plan size must equal b");
    } else {
        plan_ = build_plan(FactorKind::SqrtPrefix, BandingMode::NotBanded, b);
    }
    sens_c_ = sens_single(plan_.c);

    L_ = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(k))));
    const double parts = 2.0 * static_cast<double>(L_) + 2.0;
    eps1_ = cfg_.epsilon / parts;
    delta1_ = cfg_.delta / parts;
    eps2_ = eps1_ / std::sqrt(8.0 * d * std::log(4.0 * d / delta1_));
    delta2_ = delta1_ / (2.0 * d);

    const long long Lg = std::max<long long>(1, static_cast<long long>(L_));
    Kc_ = cfg_.crude_count_override > 0 ? cfg_.crude_count_override
                                        : min_crude_count(Lg, eps2_, delta2_, gamma_);
    if (static_cast<long long>(b) < 2 * Kc_) {
        throw precondition_error(
            "WithholdReleaseEstimator: b < 2 * crude count, the diversity condition can never hold");
    }

    count_.assign(b, 0);
    total_.assign(b, std::vector<double>(d, 0.0));
    chunk_.assign(b, std::vector<double>(d, 0.0));
    levels_.resize(L_ + 1);
    for (std::size_t l = 0; l <= L_; ++l) {
        levels_[l].chunk_size = l == 0 ? 1 : (std::size_t{1} << (l - 1));
        levels_[l].proj_prefix.assign(d, 0.0);
        levels_[l].box = ProjectionBox::unbounded_box();
    }
    if (cfg_.bounded_data) {
        // With coordinate-bounded data the first two mechanisms need no
        // crude estimate: their averages always lie in [-zeta, zeta]^d.
        for (std::size_t l = 0; l <= std::min<std::size_t>(1, L_); ++l) {
            levels_[l].active = true;
            if (!cfg_.noiseless) {
                levels_[l].box = ProjectionBox::centered(std::vector<double>(d, 0.0), cfg_.zeta);
                levels_[l].sigma = gaussian_scale(eps1_, delta1_) * sens_c_ *
                                   levels_[l].box.l2_diameter() / 2.0;
            }
        }
    }
}

bool WithholdReleaseEstimator::buffers_empty() const {
    for (const LevelState& lv : levels_) {
        if (!lv.buffer.empty()) return false;
    }
    return true;
}

long long WithholdReleaseEstimator::released_effective() const {
    long long s = 0;
    for (const LevelState& lv : levels_) {
        if (lv.active) s += static_cast<long long>(lv.chunk_size) * static_cast<long long>(lv.member_count);
    }
    return s;
}

void WithholdReleaseEstimator::append_member(std::size_t l, std::span<const double> z) {
    LevelState& lv = levels_[l];
    std::vector<double> proj(z.begin(), z.end());
    lv.box.project(proj);
    for (std::size_t j = 0; j < proj.size(); ++j) lv.proj_prefix[j] += proj[j];
    ++lv.member_count;
}

void WithholdReleaseEstimator::activate(std::size_t l) {
    LevelState& lv = levels_[l];
    const std::size_t d = cfg_.dim;
    if (!cfg_.noiseless) {
        auto bins = greedy_bin_covering(count_, static_cast<long long>(lv.chunk_size));
        if (static_cast<long long>(bins.size()) < Kc_) {
            throw precondition_error("withhold-release: bin covering fell short of the crude count");
        }
        DenseMatrix Y(static_cast<std::size_t>(Kc_), d);
        for (long long bi = 0; bi < Kc_; ++bi) {
            long long weight = 0;
            for (int u : bins[static_cast<std::size_t>(bi)]) weight += count_[static_cast<std::size_t>(u)];
            for (std::size_t j = 0; j < d; ++j) {
                double s = 0.0;
                for (int u : bins[static_cast<std::size_t>(bi)]) s += total_[static_cast<std::size_t>(u)][j];
                Y.at(static_cast<std::size_t>(bi), j) = s / static_cast<double>(weight);
            }
        }
        const double Lg = std::max(1.0, static_cast<double>(L_));
        const double isz = static_cast<double>(lv.chunk_size);
        const double z2 = cfg_.zeta * cfg_.zeta;
        const double tau_prime =
            std::sqrt(2.0 * z2 * std::log(2.0 * Lg * static_cast<double>(Kc_) * d / gamma_) / isz);
        const double tau =
            std::sqrt(2.0 * z2 * std::log(2.0 * Lg * d * static_cast<double>(cfg_.users) / gamma_) / isz);
        lv.box = projection_interval(Y, tau_prime, tau, eps1_, delta1_, cfg_.seed,
                                     static_cast<std::uint64_t>(l));
        if (cfg_.bounded_data && lv.box.half_width >= cfg_.zeta) {
            // Coordinate-bounded data always lies in [-zeta, zeta]^d, so the
            // trivial box is sound whenever it is tighter than the estimated one.
            lv.box = ProjectionBox::centered(std::vector<double>(d, 0.0), cfg_.zeta);
        }
        lv.sigma = gaussian_scale(eps1_, delta1_) * sens_c_ * lv.box.l2_diameter() / 2.0;
    }
    lv.active = true;
    for (auto& [user, z] : lv.buffer) append_member(l, z);
    lv.buffer.clear();
}

std::vector<double> WithholdReleaseEstimator::release() const {
    const std::size_t d = cfg_.dim;
    std::vector<double> out(d, 0.0);
    long long denom = released_effective();
    bool any_active = false;
    for (const LevelState& lv : levels_) any_active |= lv.active;
    if (!any_active || denom == 0) return out;

    for (std::size_t l = 0; l < levels_.size(); ++l) {
        const LevelState& lv = levels_[l];
        if (!lv.active || lv.member_count == 0) continue;
        const double w = static_cast<double>(lv.chunk_size);
        for (std::size_t j = 0; j < d; ++j) out[j] += w * lv.proj_prefix[j];
        if (lv.sigma > 0.0) {
            // Noise combination for the m-th prefix sum: sum_i a_{m-i} xi_i
            // with xi_i the level's i-th mechanism draw.
            const std::size_t m = lv.member_count;
            for (std::size_t i = 1; i <= m; ++i) {
                const double coeff = plan_.a[m - i];
                const std::uint64_t stream = (static_cast<std::uint64_t>(l) << 32) | i;
                for (std::size_t j = 0; j < d; ++j) {
                    out[j] += w * coeff * lv.sigma * gaussian(cfg_.seed, kDomainMechanismNoise, stream, j);
                }
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) out[j] /= static_cast<double>(denom);
    return out;
}

std::vector<double> WithholdReleaseEstimator::observe(int user, std::span<const double> x) {
    const std::size_t d = cfg_.dim;
    if (user < 0 || static_cast<std::size_t>(user) >= cfg_.users) {
        throw precondition_error("observe: user id out of range");
    }
    if (x.size() != d) throw precondition_error("observe: dimension mismatch");
    const auto u = static_cast<std::size_t>(user);

    ++t_;
    const long long prev = count_[u]++;
    for (LevelState& lv : levels_) {
        if (prev < static_cast<long long>(lv.chunk_size)) ++lv.min_sum;
    }
    for (std::size_t j = 0; j < d; ++j) {
        total_[u][j] += x[j];
        chunk_[u][j] += x[j];
    }

    const long long cnt = count_[u];
    if (is_power_of_two(cnt)) {
        const std::size_t l = log2_exact(cnt);
        if (l <= L_) {
            covered_ += static_cast<long long>(levels_[l].chunk_size);
            std::vector<double> z(d);
            for (std::size_t j = 0; j < d; ++j) {
                z[j] = chunk_[u][j] / static_cast<double>(levels_[l].chunk_size);
                chunk_[u][j] = 0.0;
            }
            if (levels_[l].active) {
                append_member(l, z);
            } else {
                levels_[l].buffer.emplace_back(user, std::move(z));
            }
        }
    }

    for (std::size_t l = 0; l <= L_; ++l) {
        LevelState& lv = levels_[l];
        if (!lv.active && lv.min_sum >= static_cast<long long>(lv.chunk_size) * 2 * Kc_) {
            activate(l);
        }
    }
    return release();
}

std::vector<int> round_robin_pattern(std::size_t n, int b) {
    if (b < 1) throw precondition_error("round_robin_pattern: b must be >= 1");
    std::vector<int> u(n);
    for (std::size_t t = 0; t < n; ++t) u[t] = static_cast<int>(t % static_cast<std::size_t>(b));
    return u;
}

DenseMatrix withhold_release_run(const WithholdConfig& cfg, const DenseMatrix& X,
                                 std::span<const int> arrivals) {
    if (X.rows != arrivals.size()) throw precondition_error("withhold_release_run: shape mismatch");
    if (X.cols != cfg.dim) throw precondition_error("withhold_release_run: dimension mismatch");
    WithholdReleaseEstimator est(cfg);
    DenseMatrix out(X.rows, X.cols);
    std::vector<double> x(X.cols);
    for (std::size_t t = 0; t < X.rows; ++t) {
        for (std::size_t j = 0; j < X.cols; ++j) x[j] = X.at(t, j);
        const auto r = est.observe(arrivals[t], x);
        for (std::size_t j = 0; j < X.cols; ++j) out.at(t, j) = r[j];
    }
    return out;
}

}  // namespace dpmean
