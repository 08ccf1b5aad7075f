#pragma once

// Exact-rational twin of the series algebra, used as a golden oracle for
// small n. The double-precision path is the production one; this mode exists
// so tests can pin coefficients like -1/12 exactly instead of asserting
// against rounded literals.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <vector>

#include "dpmean/toeplitz.hpp"
#include "dpmean/util.hpp"

namespace dpmean::rational {

using Rational = boost::multiprecision::cpp_rational;
using Series = std::vector<Rational>;

inline constexpr std::size_t kMaxExactLength = 64;

inline void check_len(std::size_t n) {
    if (n == 0) throw precondition_error("rational series: length must be >= 1");
    if (n > kMaxExactLength) throw precondition_error("rational series: capped at n = 64");
}

inline Series dtoep(std::size_t n) {
    check_len(n);
    Series s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = Rational(1, static_cast<unsigned>(j + 1));
    return s;
}

inline Series gregory(std::size_t m) {
    check_len(m);
    Series g(m);
    g[0] = 1;
    for (std::size_t i = 1; i < m; ++i) {
        Rational s = 0;
        for (std::size_t j = 0; j < i; ++j) {
            s += g[j] * Rational(-1, static_cast<unsigned>(i + 1 - j));
        }
        g[i] = s;
    }
    return g;
}

inline Series sqrt_prefix(std::size_t n) {
    check_len(n);
    Series r(n);
    r[0] = 1;
    for (std::size_t j = 1; j < n; ++j) {
        r[j] = r[j - 1] * Rational(2 * j - 1, 2 * j);
    }
    return r;
}

inline Series multiply(const Series& a, const Series& b) {
    if (a.size() != b.size()) throw precondition_error("rational multiply: length mismatch");
    Series out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        Rational s = 0;
        for (std::size_t j = 0; j <= i; ++j) s += a[j] * b[i - j];
        out[i] = s;
    }
    return out;
}

inline Series invert(const Series& a) {
    if (a.empty() || a[0] == 0) throw precondition_error("rational invert: singular series");
    Series x(a.size());
    x[0] = 1 / a[0];
    for (std::size_t i = 1; i < a.size(); ++i) {
        Rational s = 0;
        for (std::size_t j = 1; j <= i; ++j) s += a[j] * x[i - j];
        x[i] = -s / a[0];
    }
    return x;
}

inline Series prefix_sums(const Series& a) {
    Series out = a;
    for (std::size_t j = 1; j < out.size(); ++j) out[j] += out[j - 1];
    return out;
}

inline ToeplitzSeries to_double(const Series& a) {
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) v[j] = static_cast<double>(a[j]);
    return ToeplitzSeries(std::move(v));
}

}  // namespace dpmean::rational
