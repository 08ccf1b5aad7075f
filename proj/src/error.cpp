#include "dpmean/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dpmean/util.hpp"

namespace dpmean {

double gaussian_scale(double epsilon, double delta) {
    if (!(epsilon > 0.0)) throw precondition_error("gaussian_scale: epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw precondition_error("gaussian_scale: delta must lie in (0, 1)");
    return std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

PrivacyBudget::PrivacyBudget(double eps, double del, double xi) : epsilon(eps), delta(del), clip_norm(xi) {
    (void)gaussian_scale(eps, del);  // validate domain
    if (!(xi > 0.0)) throw precondition_error("PrivacyBudget: clip norm must be > 0");
}

double PrivacyBudget::noise_multiplier() const { return gaussian_scale(epsilon, delta); }

double frob_prefix(const FactorizationPlan& plan, std::size_t t) {
    if (t < 1 || t > plan.n()) throw precondition_error("frob_prefix: t out of range");
    KahanSum total;
    double run_a2 = 0.0;
    for (std::size_t m = 1; m <= t; ++m) {
        run_a2 += plan.a[m - 1] * plan.a[m - 1];
        const double dm = static_cast<double>(m);
        total.add(run_a2 / (dm * dm));
    }
    return std::sqrt(total.value());
}

double row_norm(const FactorizationPlan& plan, std::size_t t) {
    if (t < 1 || t > plan.n()) throw precondition_error("row_norm: t out of range");
    double run_a2 = 0.0;
    for (std::size_t j = 0; j < t; ++j) run_a2 += plan.a[j] * plan.a[j];
    return std::sqrt(run_a2) / static_cast<double>(t);
}

namespace {

ErrorReport assemble(std::size_t t, double frob, double run_a2,
                     double sens, const std::optional<PrivacyBudget>& budget) {
    ErrorReport r;
    r.t = t;
    r.frob_prefix = frob;
    r.sensitivity = sens;
    r.error = frob * sens / std::sqrt(static_cast<double>(t));
    if (budget) {
        const double bt = std::sqrt(run_a2) / static_cast<double>(t);
        r.per_step_std = budget->noise_multiplier() * budget->clip_norm * sens * bt;
    }
    return r;
}

}  // namespace

ErrorReport error_at(const FactorizationPlan& plan, const ParticipationPattern& pattern,
                     std::size_t t, const std::optional<PrivacyBudget>& budget) {
    std::size_t grid[1] = {t};
    return error_curve(plan, pattern, grid, budget)[0];
}

std::vector<ErrorReport> error_curve(const FactorizationPlan& plan,
                                     const ParticipationPattern& pattern,
                                     std::span<const std::size_t> t_grid,
                                     const std::optional<PrivacyBudget>& budget) {
    if (plan.n() != pattern.n) throw precondition_error("error_curve: plan/pattern length mismatch");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 1 || t_grid[i] > plan.n()) throw precondition_error("error_curve: t out of range");
        if (i > 0 && t_grid[i] <= t_grid[i - 1]) throw precondition_error("error_curve: grid must ascend");
    }
    const double sens = sens_for_plan(plan, pattern);

    std::vector<ErrorReport> out;
    out.reserve(t_grid.size());
    KahanSum frob2;
    double run_a2 = 0.0;
    std::size_t next = 0;
    for (std::size_t m = 1; m <= plan.n() && next < t_grid.size(); ++m) {
        run_a2 += plan.a[m - 1] * plan.a[m - 1];
        const double dm = static_cast<double>(m);
        frob2.add(run_a2 / (dm * dm));
        if (m == t_grid[next]) {
            out.push_back(assemble(m, std::sqrt(frob2.value()), run_a2, sens, budget));
            ++next;
        }
    }
    return out;
}

double error_lower_bound(const ParticipationPattern& pattern) {
    KahanSum s;
    for (std::size_t j = 1; j <= pattern.n; ++j) {
        const std::size_t strides = std::min((j + pattern.b - 1) / pattern.b, pattern.k);
        const double c = static_cast<double>(strides) / static_cast<double>(j);
        s.add(c * c);
    }
    return std::sqrt(s.value() / static_cast<double>(pattern.n));
}

NuSearchResult optimize_nu(BandingMode banding, const ParticipationPattern& pattern,
                           std::optional<std::size_t> p) {
    const std::size_t n = pattern.n;
    auto objective = [&](double nu) {
        FactorizationPlan plan = build_plan(FactorKind::NuDpFtrl, banding, n, p, nu);
        return frob_prefix(plan, n) * sens_for_plan(plan, pattern) / std::sqrt(static_cast<double>(n));
    };

    constexpr int kGrid = 200;
    const double lo = 1e-4;
    const double hi = 1.0 - 1e-4;
    const double ratio = std::pow(hi / lo, 1.0 / (kGrid - 1));
    std::vector<double> nus(kGrid), vals(kGrid);
    for (int i = 0; i < kGrid; ++i) nus[i] = lo * std::pow(ratio, i);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < kGrid; ++i) vals[i] = objective(nus[i]);

    int best = 0;
    for (int i = 1; i < kGrid; ++i) {
        if (vals[i] < vals[best]) best = i;
    }

    // One golden-section pass on the bracket around the best grid point.
    double a = nus[std::max(0, best - 1)];
    double b = nus[std::min(kGrid - 1, best + 1)];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = objective(x2);
        }
    }
    NuSearchResult r;
    r.nu = 0.5 * (a + b);
    r.error = objective(r.nu);
    if (vals[best] < r.error) {  // refinement must never lose to the grid
        r.nu = nus[best];
        r.error = vals[best];
    }
    return r;
}

}  // namespace dpmean
