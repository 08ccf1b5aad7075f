#include "dpmean/error_table.hpp"

#include <cmath>

#include "dpmean/error.hpp"
#include "dpmean/sensitivity.hpp"
#include "dpmean/util.hpp"

namespace dpmean {

bool TableCell::within_tolerance() const {
    return std::abs(value - golden) <= tolerance;
}

namespace {

struct RowSpec {
    BandingMode banding;
    FactorKind kind;
    std::array<double, 3> golden;  // k = 4, 16, 64
};

constexpr std::array<RowSpec, 10> kRows = {{
    {BandingMode::NotBanded, FactorKind::Identity, {0.068, 0.137, 0.274}},
    {BandingMode::NotBanded, FactorKind::SqrtPrefix, {0.072, 0.221, 0.813}},
    {BandingMode::NotBanded, FactorKind::MeanAware, {0.042, 0.086, 0.186}},
    {BandingMode::NotBanded, FactorKind::NuDpFtrl, {0.043, 0.086, 0.172}},
    {BandingMode::Banded, FactorKind::SqrtPrefix, {0.047, 0.094, 0.196}},
    {BandingMode::Banded, FactorKind::MeanAware, {0.042, 0.084, 0.169}},
    {BandingMode::Banded, FactorKind::NuDpFtrl, {0.043, 0.086, 0.172}},
    {BandingMode::BandedInverse, FactorKind::SqrtPrefix, {0.045, 0.089, 0.179}},
    {BandingMode::BandedInverse, FactorKind::MeanAware, {0.042, 0.085, 0.172}},
    {BandingMode::BandedInverse, FactorKind::NuDpFtrl, {0.043, 0.086, 0.172}},
}};

constexpr std::array<std::size_t, 3> kParticipations = {4, 16, 64};

}  // namespace

std::size_t default_bandwidth(FactorKind kind, BandingMode banding, std::size_t b) {
    if (banding == BandingMode::NotBanded) return 0;
    if (kind == FactorKind::SqrtPrefix) {
        const double lb = static_cast<double>(b);
        const double p = banding == BandingMode::Banded ? std::floor(std::log(lb))
                                                        : std::ceil(std::log2(lb));
        return std::max<std::size_t>(1, static_cast<std::size_t>(p));
    }
    return b;  // mean-aware and decayed kinds
}

std::vector<TableCell> compute_error_table(std::size_t n) {
    std::vector<TableCell> cells;
    cells.reserve(kRows.size() * kParticipations.size());
    for (const RowSpec& row : kRows) {
        for (std::size_t ki = 0; ki < kParticipations.size(); ++ki) {
            const std::size_t k = kParticipations[ki];
            const std::size_t b = n / k;
            const auto pattern = ParticipationPattern::with_max_participations(n, b, k);
            const std::size_t p = default_bandwidth(row.kind, row.banding, b);

            TableCell cell;
            cell.banding = row.banding;
            cell.kind = row.kind;
            cell.k = k;
            cell.b = b;
            cell.p = p;
            cell.golden = row.golden[ki];
            cell.tolerance = row.kind == FactorKind::NuDpFtrl ? kTableTolNu : kTableTol;

            std::optional<std::size_t> pw;
            if (row.banding != BandingMode::NotBanded) pw = p;
            if (row.kind == FactorKind::NuDpFtrl) {
                NuSearchResult res = optimize_nu(row.banding, pattern, pw);
                cell.nu = res.nu;
                cell.value = res.error;
            } else {
                FactorizationPlan plan = build_plan(row.kind, row.banding, n, pw);
                cell.value = error_at(plan, pattern, n).error;
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace dpmean
