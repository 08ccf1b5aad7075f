#include "dpmean/sensitivity.hpp"

#include <cmath>
#include <vector>

#include "dpmean/util.hpp"

namespace dpmean {

ParticipationPattern::ParticipationPattern(std::size_t n_, std::size_t b_) {
    if (n_ == 0) throw precondition_error("ParticipationPattern: n must be >= 1");
    if (b_ < 1 || b_ > n_) throw precondition_error("ParticipationPattern: need 1 <= b <= n");
    n = n_;
    b = b_;
    k = (n_ + b_ - 1) / b_;
}

ParticipationPattern ParticipationPattern::with_max_participations(std::size_t n, std::size_t b,
                                                                   std::size_t k) {
    ParticipationPattern p(n, b);
    if (k < 1) throw precondition_error("ParticipationPattern: k must be >= 1");
    if (k > p.k) throw precondition_error("ParticipationPattern: k exceeds ceil(n/b)");
    p.k = k;
    return p;
}

ParticipationPattern ParticipationPattern::from_target_k(std::size_t n, std::size_t k) {
    if (k < 1 || k > n) throw precondition_error("ParticipationPattern: need 1 <= k <= n");
    return ParticipationPattern(n, (n + k - 1) / k);
}

double sens_single(const ToeplitzSeries& c) {
    return l2_norm(c.c);
}

bool sens_exact_admissible(const ToeplitzSeries& c, double tol) {
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] < -tol) return false;
        if (j > 0 && c[j] > c[j - 1] + tol) return false;
    }
    return true;
}

double sens_min_sep(const ToeplitzSeries& c, const ParticipationPattern& pattern) {
    if (c.size() != pattern.n) throw precondition_error("sens_min_sep: series/pattern length mismatch");
    if (!sens_exact_admissible(c)) {
        throw precondition_error(
            "sens_min_sep: coefficients must be non-negative and non-increasing; "
            "use sens_enumerate for general matrices");
    }
    const std::size_t n = pattern.n;
    const std::size_t b = pattern.b;
    const std::size_t kb = pattern.k * b;
    // S_i = sum of the at-most-k strided coefficients c_i, c_{i-b}, ...,
    // maintained by one add and (when the window is full) one subtract.
    std::vector<double> s(n);
    KahanSum total;
    for (std::size_t i = 0; i < n; ++i) {
        double si = c[i];
        if (i >= b) si += s[i - b];
        if (i >= kb) si -= c[i - kb];
        s[i] = si;
        total.add(si * si);
    }
    return std::sqrt(total.value());
}

namespace {

struct EnumState {
    const DenseMatrix* gram;
    std::size_t n, b, k;
    std::vector<std::size_t> chosen;
    double sum = 0.0;
    double best = 0.0;

    void extend(std::size_t start) {
        if (sum > best) best = sum;
        if (chosen.size() == k) return;
        for (std::size_t m = start; m < n; ++m) {
            double delta = std::abs(gram->at(m, m));
            for (std::size_t i : chosen) delta += 2.0 * std::abs(gram->at(i, m));
            chosen.push_back(m);
            sum += delta;
            extend(m + b);
            sum -= delta;
            chosen.pop_back();
        }
    }
};

}  // namespace

double sens_enumerate(const DenseMatrix& C, const ParticipationPattern& pattern) {
    if (C.rows != C.cols || C.rows != pattern.n) {
        throw precondition_error("sens_enumerate: matrix/pattern shape mismatch");
    }
    if (pattern.n > 24) throw precondition_error("sens_enumerate: capped at n = 24");
    // Gram matrix C^T C.
    const std::size_t n = pattern.n;
    DenseMatrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < n; ++m) s += C.at(m, i) * C.at(m, j);
            gram.at(i, j) = s;
            gram.at(j, i) = s;
        }
    }
    EnumState st;
    st.gram = &gram;
    st.n = n;
    st.b = pattern.b;
    st.k = pattern.k;
    st.extend(0);
    return std::sqrt(st.best);
}

double sens_for_plan(const FactorizationPlan& plan, const ParticipationPattern& pattern) {
    if (sens_exact_admissible(plan.c)) return sens_min_sep(plan.c, pattern);
    if (pattern.n <= 24) return sens_enumerate(ltt_dense(plan.c), pattern);
    throw precondition_error(
        "sens_for_plan: series is not admissible for the exact formula and n > 24 "
        "rules out enumeration");
}

}  // namespace dpmean
