#include "dpmean/plan.hpp"

#include <algorithm>

#include "dpmean/util.hpp"

namespace dpmean {

std::string to_string(FactorKind k) {
    switch (k) {
        case FactorKind::Identity: return "identity";
        case FactorKind::SqrtPrefix: return "sqrt-prefix";
        case FactorKind::NuDpFtrl: return "nu-dp-ftrl";
        case FactorKind::MeanAware: return "mean-aware";
    }
    return "?";
}

std::string to_string(BandingMode m) {
    switch (m) {
        case BandingMode::NotBanded: return "none";
        case BandingMode::Banded: return "banded";
        case BandingMode::BandedInverse: return "banded-inverse";
    }
    return "?";
}

FactorKind parse_kind(const std::string& s) {
    if (s == "identity") return FactorKind::Identity;
    if (s == "sqrt-prefix") return FactorKind::SqrtPrefix;
    if (s == "nu-dp-ftrl") return FactorKind::NuDpFtrl;
    if (s == "mean-aware") return FactorKind::MeanAware;
    throw precondition_error("unknown factorization kind: " + s);
}

BandingMode parse_banding(const std::string& s) {
    if (s == "none") return BandingMode::NotBanded;
    if (s == "banded") return BandingMode::Banded;
    if (s == "banded-inverse") return BandingMode::BandedInverse;
    throw precondition_error("unknown banding mode: " + s);
}

std::string FactorizationPlan::label() const {
    std::string out = to_string(kind) + "/" + to_string(banding);
    if (bandwidth) out += " p=" + std::to_string(*bandwidth);
    if (nu) out += " nu=" + std::to_string(*nu);
    return out;
}

namespace {

struct BaseSeries {
    ToeplitzSeries c;
    ToeplitzSeries c_inv;
};

BaseSeries base_series(FactorKind kind, std::size_t n, std::optional<double> nu) {
    switch (kind) {
        case FactorKind::Identity:
            return {identity_series(n), identity_series(n)};
        case FactorKind::MeanAware:
            return {dtoep_series(n), gregory_coeffs(n)};
        case FactorKind::SqrtPrefix:
            return {sqrt_prefix_series(n), sqrt_prefix_inverse(n)};
        case FactorKind::NuDpFtrl: {
            if (!nu) throw precondition_error("build_plan: nu-dp-ftrl requires nu");
            return {nu_sqrt_series(*nu, n), nu_sqrt_inverse(*nu, n)};
        }
    }
    throw precondition_error("build_plan: unknown kind");
}

}  // namespace

FactorizationPlan build_plan(FactorKind kind, BandingMode banding, std::size_t n,
                             std::optional<std::size_t> p, std::optional<double> nu) {
    if (n == 0) throw precondition_error("build_plan: n must be >= 1");
    if (banding != BandingMode::NotBanded) {
        if (!p) throw precondition_error("build_plan: banded modes require a bandwidth");
        if (*p < 1 || *p > n) throw precondition_error("build_plan: bandwidth must lie in [1, n]");
    }

    BaseSeries base = base_series(kind, n, nu);
    FactorizationPlan plan;
    plan.kind = kind;
    plan.banding = banding;
    plan.nu = nu;

    switch (banding) {
        case BandingMode::NotBanded:
            plan.c = std::move(base.c);
            plan.c_inv = std::move(base.c_inv);
            plan.bandwidth = std::nullopt;
            break;
        case BandingMode::Banded:
            plan.c = band(base.c, *p);
            plan.c_inv = ltt_invert(plan.c);
            plan.bandwidth = p;
            break;
        case BandingMode::BandedInverse:
            plan.c_inv = band(base.c_inv, *p);
            plan.c = ltt_invert(plan.c_inv);
            plan.bandwidth = p;
            break;
    }
    plan.a = prefix_sums(plan.c_inv);
    return plan;
}

}  // namespace dpmean
