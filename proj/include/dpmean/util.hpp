#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace dpmean {

// Violated input contract (bad parameter, inadmissible series, size cap).
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// File-level failure (missing file, malformed row).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Compensated accumulator. Keeps long sums (harmonic-style series with
/// 10^5..10^6 terms) accurate enough for 1e-12 comparisons.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline std::size_t checked_index(std::size_t i, std::size_t n, const char* what) {
    if (i >= n) throw precondition_error(std::string(what) + ": index out of range");
    return i;
}

}  // namespace dpmean
