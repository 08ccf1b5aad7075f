#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dpmean/dense.hpp"
#include "dpmean/plan.hpp"

namespace dpmean {

/// Sequentially fill bins with users until each closed bin S satisfies
/// sum_{u in S} min(k_u, m) >= m. Returns the closed bins only; bins are
/// disjoint, so one user's data can enter at most one bin.
std::vector<std::vector<int>> greedy_bin_covering(std::span<const long long> counts, long long m);

/// Private histogram over the grid of width-2h buckets centered at even
/// multiples of h (bucket k covers (2kh - h, 2kh + h]). Occupied buckets
/// get Gaussian noise on their counts; scores below the delta-calibrated
/// threshold are dropped. Only occupied buckets can appear in the output.
/// Requires epsilon, delta in (0, 1).
std::map<long long, double> stable_histogram(std::span<const double> values, double half_width,
                                             double epsilon, double delta, std::uint64_t seed,
                                             std::uint64_t stream);

/// Axis-aligned box with a common per-coordinate half width. An unbounded
/// box (projection disabled) is represented with an empty center.
struct ProjectionBox {
    std::vector<double> center;
    double half_width = 0.0;

    static ProjectionBox unbounded_box() { return ProjectionBox{}; }
    static ProjectionBox centered(std::vector<double> c, double hw) { return {std::move(c), hw}; }

    bool unbounded() const { return center.empty(); }
    std::size_t dim() const { return center.size(); }
    /// l2 diameter of the box: 2 * sqrt(d) * half_width.
    double l2_diameter() const;
    /// Clamp x into the box per coordinate (no-op when unbounded).
    void project(std::span<double> x) const;
};

/// Per coordinate: histogram the K crude averages on the width-2*tau_prime
/// grid under an advanced-composition split of (epsilon, delta), take the
/// argmax positive bucket (lowest index wins ties, 0 when the histogram is
/// all zero), and widen by 2*tau_prime + tau.
ProjectionBox projection_interval(const DenseMatrix& Y, double tau_prime, double tau,
                                  double epsilon, double delta, std::uint64_t seed,
                                  std::uint64_t stream);

/// Smallest K >= 4 with
///   (2 L K e^{eps}/delta) exp(-eps K / 64) + 2 L exp(-K / 2048) <= gamma,
/// located by doubling then bisection. This is the crude-estimate sample
/// count the diversity gate requires.
long long min_crude_count(long long levels_L, double eps, double delta, double gamma);

struct WithholdConfig {
    std::size_t users = 1;               // b
    std::size_t max_participations = 1;  // k; the stream is n = k * b long
    std::size_t dim = 1;
    double epsilon = 1.0;
    double delta = 1e-6;
    double zeta = 1.0;   // sub-Gaussian proxy (coordinate bound for bounded data)
    double gamma = 0.0;  // failure knob; 0 resolves to 0.05 / dim
    std::uint64_t seed = 1;
    bool bounded_data = false;  // pre-activate levels 0 and 1 with [-zeta, zeta]^d
    bool noiseless = false;     // test hook: all noise off, projection disabled
    /// Diversity threshold override for desk-scale runs; 0 derives the
    /// theoretical value via min_crude_count, which is astronomically large
    /// for small budgets (see README).
    long long crude_count_override = 0;
    /// Factorization of the prefix-sum workload at size b; defaults to the
    /// square-root factorization B = C.
    std::optional<FactorizationPlan> plan;
};

/// Exponential withhold-release estimator: L+1 = floor(log2 k)+1 private
/// prefix-sum mechanisms over exponentially growing per-user averages,
/// gated by a diversity condition, with privately estimated projection
/// boxes shrinking the noise. Until the first mechanism activates the
/// released estimate is zero.
class WithholdReleaseEstimator {
public:
    explicit WithholdReleaseEstimator(WithholdConfig cfg);

    /// Process observation x of `user` (0-based, < b) and release the
    /// current estimate.
    std::vector<double> observe(int user, std::span<const double> x);

    std::size_t step() const { return t_; }
    std::size_t level_count() const { return L_ + 1; }

    /// Observations not covered by any completed per-user chunk.
    long long withheld() const { return static_cast<long long>(t_) - covered_; }
    /// Effective released sample size: sum over active levels of |I_l| * |M_l|.
    long long released_effective() const;

    bool level_active(std::size_t l) const { return levels_[l].active; }
    std::size_t level_members(std::size_t l) const { return levels_[l].member_count; }
    std::size_t level_buffered(std::size_t l) const { return levels_[l].buffer.size(); }
    double level_sigma(std::size_t l) const { return levels_[l].sigma; }
    const ProjectionBox& level_box(std::size_t l) const { return levels_[l].box; }
    bool buffers_empty() const;

    long long crude_count() const { return Kc_; }
    double eps_prime() const { return eps1_; }
    double delta_prime() const { return delta1_; }
    double eps_second() const { return eps2_; }
    double delta_second() const { return delta2_; }

private:
    struct LevelState {
        bool active = false;
        std::size_t chunk_size = 1;  // |I_l|
        long long min_sum = 0;       // sum_u min(k_u, |I_l|)
        std::size_t member_count = 0;
        std::vector<double> proj_prefix;               // sum of projected member averages
        std::vector<std::pair<int, std::vector<double>>> buffer;  // completed but unreleased
        ProjectionBox box;
        double sigma = 0.0;
    };

    void activate(std::size_t l);
    void append_member(std::size_t l, std::span<const double> z);
    std::vector<double> release() const;

    WithholdConfig cfg_;
    FactorizationPlan plan_;
    std::size_t L_ = 0;
    double eps1_ = 0, delta1_ = 0;  // per-mechanism budget (eps, delta)/(2L+2)
    double eps2_ = 0, delta2_ = 0;  // per-coordinate crude split
    long long Kc_ = 0;
    double sens_c_ = 0.0;
    double gamma_ = 0.0;

    std::size_t t_ = 0;
    long long covered_ = 0;
    std::vector<long long> count_;              // k_{t,u}
    std::vector<std::vector<double>> total_;    // per-user running sum
    std::vector<std::vector<double>> chunk_;    // per-user current chunk sum
    std::vector<LevelState> levels_;
};

/// Arrival pattern where user u contributes at steps u, b+u, 2b+u, ...
std::vector<int> round_robin_pattern(std::size_t n, int b);

/// Whole-stream convenience wrapper: feed X (n x d, row t = observation of
/// arrivals[t]) through a fresh estimator and collect the n released
/// estimates.
DenseMatrix withhold_release_run(const WithholdConfig& cfg, const DenseMatrix& X,
                                 std::span<const int> arrivals);

}  // namespace dpmean
