#include "dpmean/dense.hpp"

#include <cstdint>

#include "dpmean/util.hpp"

namespace dpmean {

namespace {
void check_cap(std::size_t n) {
    if (n > kDenseCap) throw precondition_error("dense materialization capped at n = 4096");
}
}  // namespace

DenseMatrix ltt_dense(const ToeplitzSeries& s) {
    check_cap(s.size());
    const std::size_t n = s.size();
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) m.at(i, j) = s[i - j];
    }
    return m;
}

DenseMatrix running_mean_matrix(std::size_t n) {
    check_cap(n);
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 1.0 / static_cast<double>(i + 1);
        for (std::size_t j = 0; j <= i; ++j) m.at(i, j) = w;
    }
    return m;
}

DenseMatrix b_dense(const FactorizationPlan& plan) {
    check_cap(plan.n());
    const std::size_t n = plan.n();
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 1.0 / static_cast<double>(i + 1);
        for (std::size_t j = 0; j <= i; ++j) m.at(i, j) = w * plan.a[i - j];
    }
    return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw precondition_error("matmul: shape mismatch");
    DenseMatrix out(a.rows, b.cols);
    const std::int64_t rows = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for schedule(static) if (rows >= 64)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* ra = a.row(static_cast<std::size_t>(i));
        double* ro = out.row(static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = ra[k];
            if (aik == 0.0) continue;
            const double* rb = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) ro[j] += aik * rb[j];
        }
    }
    return out;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw precondition_error("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        double d = std::abs(a.v[i] - b.v[i]);
        if (d > m) m = d;
    }
    return m;
}

namespace reference {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw precondition_error("matmul: shape mismatch");
    DenseMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(k, j);
            out.at(i, j) = s;
        }
    }
    return out;
}

}  // namespace reference

}  // namespace dpmean
