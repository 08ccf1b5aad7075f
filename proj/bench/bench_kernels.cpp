// Timings of the parallel kernels against their serial references, plus the
// end-to-end hot paths. Not part of the test suite; build and run directly:
//   ./build/bench/bench_kernels [reps]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpmean/dense.hpp"
#include "dpmean/error.hpp"
#include "dpmean/error_table.hpp"
#include "dpmean/rng.hpp"
#include "dpmean/sensitivity.hpp"
#include "dpmean/simulate.hpp"
#include "dpmean/stream.hpp"
#include "dpmean/toeplitz.hpp"

using namespace dpmean;
using Clock = std::chrono::steady_clock;

namespace {

double checksum = 0.0;  // defeat dead-code elimination

template <typename F>
double time_ms(int reps, const F& f) {
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) checksum += f();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-34s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel kernels run serially\n");
#endif

    {
        const std::size_t n = 8196;
        const ToeplitzSeries a = dtoep_series(n);
        const ToeplitzSeries b = gregory_coeffs(n);
        report("series product n=8196",
               time_ms(reps, [&] { return reference::ltt_multiply(a, b)[n - 1]; }),
               time_ms(reps, [&] { return ltt_multiply(a, b)[n - 1]; }));
    }
    {
        const std::size_t n = 512;
        const DenseMatrix C = ltt_dense(dtoep_series(n));
        const DenseMatrix B = b_dense(build_plan(FactorKind::MeanAware, BandingMode::NotBanded, n));
        report("dense product n=512",
               time_ms(reps, [&] { return reference::matmul(B, C).at(n - 1, 0); }),
               time_ms(reps, [&] { return matmul(B, C).at(n - 1, 0); }));
    }
    {
        const auto pattern = ParticipationPattern(128, 16);
        EstimatorConfig cfg(PrivacyBudget(1.0, 1e-6, std::sqrt(2.0)), pattern, 16, 2);
        cfg.clip_mode = ClipMode::Clip;
        const std::vector<double> mu(2, 0.5);
        // Trial loop is the parallel axis; OMP_NUM_THREADS=1 gives the serial figure.
        const double ms = time_ms(reps, [&] { return mse_curve_alg1(cfg, mu, 2000, 7)[127]; });
        std::printf("%-34s %9.2f ms (2000 trials, n=128, d=2)\n", "monte-carlo harness", ms);
    }
    {
        const auto pattern = ParticipationPattern::with_max_participations(8196, 128, 64);
        const double ms =
            time_ms(1, [&] { return optimize_nu(BandingMode::Banded, pattern, 128).error; });
        std::printf("%-34s %9.2f ms (200-point grid + refine)\n", "nu search k=64 banded", ms);
    }
    std::printf("(checksum %g)\n", checksum);
    return 0;
}
