#include <doctest.h>

#include <cmath>

#include "dpmean/dense.hpp"
#include "dpmean/plan.hpp"
#include "dpmean/rational.hpp"
#include "dpmean/util.hpp"

using namespace dpmean;
namespace rat = dpmean::rational;
using Rat = rat::Rational;

TEST_CASE("plan: identity") {
    const FactorizationPlan plan = build_plan(FactorKind::Identity, BandingMode::NotBanded, 5);
    CHECK(plan.c.c == std::vector<double>{1, 0, 0, 0, 0});
    CHECK(plan.a.c == std::vector<double>{1, 1, 1, 1, 1});
}

TEST_CASE("plan: mean-aware a-series in exact rationals") {
    // a = prefix sums of the inverse series: 1, 1/2, 5/12, 3/8, ...
    const auto a = rat::prefix_sums(rat::gregory(4));
    CHECK(a[0] == 1);
    CHECK(a[1] == Rat(1, 2));
    CHECK(a[2] == Rat(5, 12));
    CHECK(a[3] == Rat(3, 8));

    const FactorizationPlan plan = build_plan(FactorKind::MeanAware, BandingMode::NotBanded, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(plan.a[j] == doctest::Approx(static_cast<double>(a[j])).epsilon(1e-15));
    }
}

TEST_CASE("plan: square-root factorization is self-adjoint (a == c)") {
    const FactorizationPlan plan = build_plan(FactorKind::SqrtPrefix, BandingMode::NotBanded, 32);
    for (std::size_t j = 0; j < 32; ++j) CHECK(plan.a[j] == doctest::Approx(plan.c[j]).epsilon(1e-13));
    // and c * c is the all-ones series
    const ToeplitzSeries sq = ltt_multiply(plan.c, plan.c);
    for (std::size_t j = 0; j < 32; ++j) CHECK(sq[j] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("plan: parameter validation") {
    CHECK_THROWS_AS(build_plan(FactorKind::MeanAware, BandingMode::Banded, 8), precondition_error);
    CHECK_THROWS_AS(build_plan(FactorKind::MeanAware, BandingMode::Banded, 8, 9), precondition_error);
    CHECK_THROWS_AS(build_plan(FactorKind::NuDpFtrl, BandingMode::NotBanded, 8), precondition_error);
}

TEST_CASE("plan: a-series is the prefix sum of the inverse (reconstruction)") {
    for (auto kind : {FactorKind::SqrtPrefix, FactorKind::MeanAware}) {
        for (auto banding : {BandingMode::NotBanded, BandingMode::Banded, BandingMode::BandedInverse}) {
            std::optional<std::size_t> p;
            if (banding != BandingMode::NotBanded) p = 5;
            const FactorizationPlan plan = build_plan(kind, banding, 24, p);
            const ToeplitzSeries inv = ltt_invert(plan.c);
            double run = 0.0;
            for (std::size_t j = 0; j < 24; ++j) {
                run += inv[j];
                CHECK(plan.a[j] == doctest::Approx(run).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("plan: dense reconstruction B*C == A") {
    const std::size_t n = 64;
    const DenseMatrix A = running_mean_matrix(n);
    for (auto kind : {FactorKind::Identity, FactorKind::SqrtPrefix, FactorKind::MeanAware,
                      FactorKind::NuDpFtrl}) {
        for (auto banding : {BandingMode::NotBanded, BandingMode::Banded, BandingMode::BandedInverse}) {
            std::optional<std::size_t> p;
            if (banding != BandingMode::NotBanded) p = 7;
            std::optional<double> nu;
            if (kind == FactorKind::NuDpFtrl) nu = 0.25;
            const FactorizationPlan plan = build_plan(kind, banding, n, p, nu);
            const DenseMatrix B = b_dense(plan);
            const DenseMatrix C = ltt_dense(plan.c);
            CHECK(max_abs_diff(matmul(B, C), A) <= 1e-10);
        }
    }
}

TEST_CASE("plan: mean-aware partial-sum bound |a_t| <= 1/ln t") {
    const std::size_t n = 20000;
    const FactorizationPlan plan = build_plan(FactorKind::MeanAware, BandingMode::NotBanded, n);
    for (std::size_t t = 4; t < n; ++t) {
        CHECK(std::abs(plan.a[t]) <= 1.0 / std::log(static_cast<double>(t)));
    }
}

TEST_CASE("dense kernel matches serial reference") {
    const std::size_t n = 96;
    const DenseMatrix B = b_dense(build_plan(FactorKind::MeanAware, BandingMode::NotBanded, n));
    const DenseMatrix C = ltt_dense(dtoep_series(n));
    CHECK(max_abs_diff(matmul(B, C), reference::matmul(B, C)) <= 1e-13);
}

TEST_CASE("kind and banding names round-trip") {
    for (auto kind : {FactorKind::Identity, FactorKind::SqrtPrefix, FactorKind::NuDpFtrl,
                      FactorKind::MeanAware}) {
        CHECK(parse_kind(to_string(kind)) == kind);
    }
    for (auto b : {BandingMode::NotBanded, BandingMode::Banded, BandingMode::BandedInverse}) {
        CHECK(parse_banding(to_string(b)) == b);
    }
    CHECK_THROWS_AS(parse_kind("bogus"), precondition_error);
}
