#pragma once

#include <cstddef>
#include <vector>

namespace dpmean {

/// First column of a lower-triangular Toeplitz (LTT) matrix. Entry (i, j)
/// of the full matrix is c[i - j] for j <= i, so the first column encodes
/// everything. Products and inverses are truncated power-series operations
/// on the coefficient vector.
struct ToeplitzSeries {
    std::vector<double> c;

    ToeplitzSeries() = default;
    explicit ToeplitzSeries(std::vector<double> coeffs);

    std::size_t size() const { return c.size(); }
    double operator[](std::size_t i) const { return c[i]; }

    /// Number of leading coefficients up to the last nonzero one. A series
    /// banded to p has effective_bandwidth() <= p, which the inversion
    /// routine exploits for O(n*p) instead of O(n^2).
    std::size_t effective_bandwidth() const;
};

// Canonical series.
ToeplitzSeries identity_series(std::size_t n);

/// Running-mean Toeplitz column: c_j = 1/(j+1).
ToeplitzSeries dtoep_series(std::size_t n);

/// Inverse series of dtoep_series: g_0 = 1 and g_i = sum_{j<i} g_j * (-1)/(i+1-j).
/// All coefficients after the first are negative and sum to -1 in the limit.
ToeplitzSeries gregory_coeffs(std::size_t m);

/// Square root of the all-ones prefix-sum matrix: r_0 = 1,
/// r_j = r_{j-1} * (2j-1) / (2j). Satisfies LTT(r)^2 = prefix sums.
ToeplitzSeries sqrt_prefix_series(std::size_t n);

/// Inverse of sqrt_prefix_series: 1, then -r_j / (2j-1).
ToeplitzSeries sqrt_prefix_inverse(std::size_t n);

/// Exponentially decayed square-root prefix series: r_j * (1-nu)^j.
/// Accepts nu in [0, 1); nu = 0 reduces to sqrt_prefix_series.
ToeplitzSeries nu_sqrt_series(double nu, std::size_t n);
ToeplitzSeries nu_sqrt_inverse(double nu, std::size_t n);

/// Truncated Cauchy product: result_i = sum_{j<=i} a_j * b_{i-j}.
/// Lengths must match. Parallelized over output coefficients.
ToeplitzSeries ltt_multiply(const ToeplitzSeries& a, const ToeplitzSeries& b);

/// Power-series inverse: ltt_multiply(a, result) = identity. Requires
/// a[0] != 0. Cost is O(n * effective_bandwidth(a)).
ToeplitzSeries ltt_invert(const ToeplitzSeries& a);

/// Zero all coefficients at index >= p. Requires 1 <= p <= n.
ToeplitzSeries band(const ToeplitzSeries& s, std::size_t p);

/// Invert, band the inverse to p, and invert back. For the running-mean
/// series this yields the recursion c_i = sum_{j=1}^{min(p-1,i)} (-g_j) c_{i-j}.
ToeplitzSeries banded_inverse(const ToeplitzSeries& s, std::size_t p);

/// Prefix sums of the coefficients (first column of E1 * LTT(s)).
ToeplitzSeries prefix_sums(const ToeplitzSeries& s);

namespace reference {
/// Plain serial product, kept as an oracle for the parallel kernel.
ToeplitzSeries ltt_multiply(const ToeplitzSeries& a, const ToeplitzSeries& b);
}  // namespace reference

}  // namespace dpmean
