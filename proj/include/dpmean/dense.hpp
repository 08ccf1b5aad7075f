#pragma once

// Dense materialization of series-form factors. Test-scale utilities: all
// production formulas stay in O(n) / O(n*p) series form, these exist as
// oracles and for the offline recomposition check.

#include <cstddef>
#include <vector>

#include "dpmean/plan.hpp"
#include "dpmean/toeplitz.hpp"

namespace dpmean {

inline constexpr std::size_t kDenseCap = 4096;

struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
    double* row(std::size_t i) { return v.data() + i * cols; }
    const double* row(std::size_t i) const { return v.data() + i * cols; }
};

/// LTT matrix from its first column.
DenseMatrix ltt_dense(const ToeplitzSeries& s);

/// The running-mean workload: A[i][j] = 1/(i+1) for j <= i (0-indexed).
DenseMatrix running_mean_matrix(std::size_t n);

/// B = D * LTT(a) materialized from the plan's a-series.
DenseMatrix b_dense(const FactorizationPlan& plan);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

namespace reference {
/// Serial triple loop, oracle for the parallel kernel.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
}  // namespace reference

}  // namespace dpmean
