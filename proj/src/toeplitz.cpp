#include "dpmean/toeplitz.hpp"

#include <cmath>
#include <cstdint>

#include "dpmean/util.hpp"

namespace dpmean {

ToeplitzSeries::ToeplitzSeries(std::vector<double> coeffs) : c(std::move(coeffs)) {
    if (c.empty()) throw precondition_error("ToeplitzSeries: length must be >= 1");
    for (double x : c) {
        if (!std::isfinite(x)) throw precondition_error("ToeplitzSeries: non-finite coefficient");
    }
}

std::size_t ToeplitzSeries::effective_bandwidth() const {
    std::size_t p = c.size();
    while (p > 1 && c[p - 1] == 0.0) --p;
    return p;
}

ToeplitzSeries identity_series(std::size_t n) {
    if (n == 0) throw precondition_error("identity_series: n must be >= 1");
    std::vector<double> v(n, 0.0);
    v[0] = 1.0;
    return ToeplitzSeries(std::move(v));
}

ToeplitzSeries dtoep_series(std::size_t n) {
    if (n == 0) throw precondition_error("dtoep_series: n must be >= 1");
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = 1.0 / static_cast<double>(j + 1);
    return ToeplitzSeries(std::move(v));
}

ToeplitzSeries gregory_coeffs(std::size_t m) {
    if (m == 0) throw precondition_error("gregory_coeffs: m must be >= 1");
    std::vector<double> g(m);
    g[0] = 1.0;
    // Reciprocal table turns the inner sum into multiply-adds; the recursion
    // itself is a sequential series inversion and stays serial.
    std::vector<double> recip(m + 2);
    for (std::size_t j = 1; j < m + 2; ++j) recip[j] = 1.0 / static_cast<double>(j);
    for (std::size_t i = 1; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < i; ++j) s += g[j] * recip[i + 1 - j];
        g[i] = -s;
    }
    return ToeplitzSeries(std::move(g));
}

ToeplitzSeries sqrt_prefix_series(std::size_t n) {
    if (n == 0) throw precondition_error("sqrt_prefix_series: n must be >= 1");
    std::vector<double> r(n);
    r[0] = 1.0;
    for (std::size_t j = 1; j < n; ++j) {
        r[j] = r[j - 1] * (2.0 * j - 1.0) / (2.0 * j);
    }
    return ToeplitzSeries(std::move(r));
}

ToeplitzSeries sqrt_prefix_inverse(std::size_t n) {
    ToeplitzSeries r = sqrt_prefix_series(n);
    std::vector<double> t(n);
    t[0] = 1.0;
    for (std::size_t j = 1; j < n; ++j) t[j] = -r[j] / (2.0 * j - 1.0);
    return ToeplitzSeries(std::move(t));
}

namespace {
void check_nu(double nu) {
    if (!(nu >= 0.0 && nu < 1.0)) {
        throw precondition_error("nu must lie in [0, 1)");
    }
}
}  // namespace

ToeplitzSeries nu_sqrt_series(double nu, std::size_t n) {
    check_nu(nu);
    ToeplitzSeries r = sqrt_prefix_series(n);
    double w = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        r.c[j] *= w;
        w *= (1.0 - nu);
    }
    return r;
}

ToeplitzSeries nu_sqrt_inverse(double nu, std::size_t n) {
    check_nu(nu);
    ToeplitzSeries t = sqrt_prefix_inverse(n);
    double w = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        t.c[j] *= w;
        w *= (1.0 - nu);
    }
    return t;
}

ToeplitzSeries ltt_multiply(const ToeplitzSeries& a, const ToeplitzSeries& b) {
    if (a.size() != b.size()) throw precondition_error("ltt_multiply: length mismatch");
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    std::vector<double> out(a.size());
    const double* pa = a.c.data();
    const double* pb = b.c.data();
#pragma omp parallel for schedule(static) if (n >= 2048)
    for (std::int64_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::int64_t j = 0; j <= i; ++j) s += pa[j] * pb[i - j];
        out[static_cast<std::size_t>(i)] = s;
    }
    return ToeplitzSeries(std::move(out));
}

ToeplitzSeries ltt_invert(const ToeplitzSeries& a) {
    if (a[0] == 0.0) throw precondition_error("ltt_invert: singular series (leading coefficient is zero)");
    const std::size_t n = a.size();
    const std::size_t p = a.effective_bandwidth();
    std::vector<double> x(n);
    const double inv0 = 1.0 / a[0];
    x[0] = inv0;
    for (std::size_t i = 1; i < n; ++i) {
        double s = 0.0;
        const std::size_t jmax = std::min(i, p - 1);
        for (std::size_t j = 1; j <= jmax; ++j) s += a[j] * x[i - j];
        x[i] = -s * inv0;
    }
    return ToeplitzSeries(std::move(x));
}

ToeplitzSeries band(const ToeplitzSeries& s, std::size_t p) {
    if (p < 1 || p > s.size()) throw precondition_error("band: p must lie in [1, n]");
    ToeplitzSeries out = s;
    for (std::size_t j = p; j < out.size(); ++j) out.c[j] = 0.0;
    return out;
}

ToeplitzSeries banded_inverse(const ToeplitzSeries& s, std::size_t p) {
    return ltt_invert(band(ltt_invert(s), p));
}

ToeplitzSeries prefix_sums(const ToeplitzSeries& s) {
    ToeplitzSeries out = s;
    for (std::size_t j = 1; j < out.size(); ++j) out.c[j] += out.c[j - 1];
    return out;
}

namespace reference {

ToeplitzSeries ltt_multiply(const ToeplitzSeries& a, const ToeplitzSeries& b) {
    if (a.size() != b.size()) throw precondition_error("ltt_multiply: length mismatch");
    const std::size_t n = a.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += a[j] * b[i - j];
        out[i] = s;
    }
    return ToeplitzSeries(std::move(out));
}

}  // namespace reference

}  // namespace dpmean
