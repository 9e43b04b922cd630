/** \file
 * Compares the OpenMP quantum-volume sampler against the single-threaded
 * reference: identical results required, wall times reported.
 *
 *   bench_qv [samples] [seed]
 */
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hqt/grid.hpp"
#include "hqt/qvolume.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace hqt::qv;
    const int samples = argc > 1 ? std::atoi(argv[1]) : 2000;
    const uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    if (samples <= 0) {
        std::fprintf(stderr, "usage: bench_qv [samples>0] [seed]\n");
        return 2;
    }

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled at build time\n");
#endif
    std::printf("samples per grid: %d, seed %llu\n\n", samples,
                static_cast<unsigned long long>(seed));
    std::printf("%4s %4s %8s %12s %12s %9s %s\n", "k", "h", "qubits",
                "serial [s]", "parallel [s]", "speedup", "check");

    const std::vector<std::pair<int, int>> grids{
        {3, 0}, {4, 1}, {5, 2}, {6, 4}, {6, 8}};
    bool all_match = true;
    for (const auto& [k, h] : grids) {
        const GridTopology topo(k, h);
        QvConfig cfg;
        cfg.gamma_tau = 4e-4;
        cfg.samples = samples;
        cfg.seed = seed;

        const auto t0 = Clock::now();
        const QvEstimate serial = quantum_volume_serial(topo, cfg);
        const auto t1 = Clock::now();
        const QvEstimate parallel = quantum_volume(topo, cfg);
        const auto t2 = Clock::now();

        const bool match = serial.log2_vq == parallel.log2_vq &&
                           serial.d == parallel.d &&
                           serial.n_s_mean == parallel.n_s_mean &&
                           serial.n_g_mean == parallel.n_g_mean;
        all_match = all_match && match;
        const double ts = seconds(t0, t1);
        const double tp = seconds(t1, t2);
        std::printf("%4d %4d %8d %12.3f %12.3f %8.2fx %s\n", k, h,
                    topo.qubits(), ts, tp, ts / tp,
                    match ? "identical" : "MISMATCH");
    }
    if (!all_match) {
        std::fprintf(stderr, "\nparallel and serial estimates disagree\n");
        return 1;
    }
    std::printf("\nall parallel estimates bit-identical to the reference\n");
    return 0;
}
