#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dpmean/rng.hpp"
#include "dpmean/sensitivity.hpp"
#include "dpmean/util.hpp"

using namespace dpmean;

namespace {

// Literal evaluation of the strided column-sum formula, independent of the
// sliding-window implementation.
double strided_oracle(const ToeplitzSeries& c, const ParticipationPattern& pat) {
    double total = 0.0;
    for (std::size_t i = 0; i < pat.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < pat.k && j * pat.b <= i; ++j) s += c[i - j * pat.b];
        total += s * s;
    }
    return std::sqrt(total);
}

ToeplitzSeries random_decreasing(std::size_t n, std::uint64_t seed) {
    std::vector<double> c(n);
    c[0] = 0.5 + uniform01(seed, kDomainTrial, 7, 0);
    for (std::size_t j = 1; j < n; ++j) {
        c[j] = c[j - 1] * std::sqrt(uniform01(seed, kDomainTrial, 7, j));
    }
    return ToeplitzSeries(std::move(c));
}

}  // namespace

TEST_CASE("pattern construction") {
    const ParticipationPattern p(10, 3);
    CHECK(p.k == 4);
    CHECK(ParticipationPattern(10, 10).single_participation());
    CHECK_THROWS_AS(ParticipationPattern(10, 0), precondition_error);
    CHECK_THROWS_AS(ParticipationPattern(10, 11), precondition_error);
    CHECK(ParticipationPattern::from_target_k(8196, 16).b == 513);
    CHECK(ParticipationPattern::with_max_participations(10, 3, 2).k == 2);
    CHECK_THROWS_AS(ParticipationPattern::with_max_participations(10, 3, 5), precondition_error);
}

TEST_CASE("single-participation sensitivity") {
    CHECK(sens_single(identity_series(17)) == 1.0);
    CHECK(sens_single(ToeplitzSeries({3, 4})) == doctest::Approx(5.0));
    // running-mean series approaches pi/sqrt(6)
    CHECK(sens_single(dtoep_series(2000000)) ==
          doctest::Approx(std::numbers::pi / std::sqrt(6.0)).epsilon(1e-6));
}

TEST_CASE("multi-participation sensitivity basics") {
    // identity: sqrt(k) for every (n, b)
    for (std::size_t b : {1u, 2u, 3u, 5u}) {
        const ParticipationPattern pat(12, b);
        CHECK(sens_min_sep(identity_series(12), pat) ==
              doctest::Approx(std::sqrt(static_cast<double>(pat.k))).epsilon(1e-14));
    }
    // k = 1 reduces to the single-participation value
    const ToeplitzSeries d = dtoep_series(9);
    CHECK(sens_min_sep(d, ParticipationPattern(9, 9)) == doctest::Approx(sens_single(d)));
}

TEST_CASE("multi-participation sensitivity equals the literal column-sum formula") {
    const ToeplitzSeries d = dtoep_series(6);
    const ParticipationPattern pat(6, 2);
    CHECK(pat.k == 3);
    CHECK(sens_min_sep(d, pat) == doctest::Approx(strided_oracle(d, pat)).epsilon(1e-14));
    // and against enumeration, which maximizes over all admissible index sets
    CHECK(sens_min_sep(d, pat) == doctest::Approx(sens_enumerate(ltt_dense(d), pat)).epsilon(1e-12));

    // pinned k < ceil(n/b) drops the oldest strided term
    const ParticipationPattern pinned = ParticipationPattern::with_max_participations(6, 2, 2);
    CHECK(sens_min_sep(d, pinned) == doctest::Approx(strided_oracle(d, pinned)).epsilon(1e-14));
    CHECK(sens_min_sep(d, pinned) ==
          doctest::Approx(sens_enumerate(ltt_dense(d), pinned)).epsilon(1e-12));
}

TEST_CASE("inadmissible series are rejected and routed to enumeration") {
    const ToeplitzSeries rising({1.0, 2.0, 3.0});
    CHECK_FALSE(sens_exact_admissible(rising));
    CHECK_THROWS_AS(sens_min_sep(rising, ParticipationPattern(3, 1)), precondition_error);
    CHECK(sens_enumerate(ltt_dense(rising), ParticipationPattern(3, 3)) > 0.0);
    // tolerance forgives rounding-level wobble
    CHECK(sens_exact_admissible(ToeplitzSeries({1.0, 1.0 + 1e-13})));
}

TEST_CASE("enumeration oracle basics") {
    CHECK(sens_enumerate(ltt_dense(identity_series(5)), ParticipationPattern(5, 1)) ==
          doctest::Approx(std::sqrt(5.0)));
    // k = 1: best singleton = largest column norm
    const ToeplitzSeries d = dtoep_series(5);
    CHECK(sens_enumerate(ltt_dense(d), ParticipationPattern(5, 5)) ==
          doctest::Approx(sens_single(d)).epsilon(1e-13));
    CHECK_THROWS_AS(sens_enumerate(DenseMatrix(25, 25), ParticipationPattern(25, 1)),
                    precondition_error);
}

TEST_CASE("oracle agreement on random decreasing series") {
    double worst = 0.0;
    for (std::size_t n = 2; n <= 12; ++n) {
        for (std::size_t b = 1; b <= std::min<std::size_t>(4, n); ++b) {
            for (std::uint64_t s = 0; s < 50; ++s) {
                const ToeplitzSeries c = random_decreasing(n, s * 1000 + n * 10 + b);
                const ParticipationPattern pat(n, b);
                const double exact = sens_min_sep(c, pat);
                const double oracle = sens_enumerate(ltt_dense(c), pat);
                worst = std::max(worst, std::abs(exact - oracle));
            }
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("sensitivity properties") {
    const std::size_t n = 48;
    const ToeplitzSeries c = random_decreasing(n, 99);

    // non-decreasing as b shrinks (more participations)
    double prev = 0.0;
    for (std::size_t b = n; b >= 1; --b) {
        const double s = sens_min_sep(c, ParticipationPattern(n, b));
        CHECK(s >= prev - 1e-12);
        prev = s;
    }

    // positive homogeneity
    ToeplitzSeries scaled = c;
    for (double& x : scaled.c) x *= 3.5;
    CHECK(sens_min_sep(scaled, ParticipationPattern(n, 5)) ==
          doctest::Approx(3.5 * sens_min_sep(c, ParticipationPattern(n, 5))).epsilon(1e-12));
}

TEST_CASE("banded-inverse series stay admissible") {
    for (std::size_t p : {2u, 8u, 31u}) {
        CHECK(sens_exact_admissible(banded_inverse(dtoep_series(300), p)));
        CHECK(sens_exact_admissible(banded_inverse(sqrt_prefix_series(300), p)));
        CHECK(sens_exact_admissible(banded_inverse(nu_sqrt_series(0.4, 300), p)));
    }
}
