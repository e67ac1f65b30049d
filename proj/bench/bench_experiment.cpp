// Compares the serial reference runner against the OpenMP trial loop on the
// same configuration and verifies they agree row for row.

#include <chrono>
#include <cstdio>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tomo/experiment.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string rows_as_csv(const tomo::ExperimentResult& r) {
    std::ostringstream ss;
    r.save_csv(ss);
    return ss.str();
}

}  // namespace

int main() {
    tomo::ExperimentConfig cfg;
    cfg.tree_kind = tomo::TreeKind::general;
    cfg.n_leaves = 10;
    cfg.sample_sizes = {512, 2048, 8192};
    cfg.trials = 60;
    cfg.base_seed = 20240701;

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    const auto t0 = std::chrono::steady_clock::now();
    const auto serial = tomo::run_experiment(cfg, /*parallel=*/false);
    const double t_serial = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    const auto parallel = tomo::run_experiment(cfg, /*parallel=*/true);
    const double t_parallel = seconds_since(t1);

    std::printf("serial    %.3f s\n", t_serial);
    std::printf("parallel  %.3f s\n", t_parallel);
    std::printf("speedup   %.2fx\n", t_serial / t_parallel);

    if (rows_as_csv(serial) != rows_as_csv(parallel)) {
        std::printf("MISMATCH: parallel results differ from the serial reference\n");
        return 1;
    }
    std::printf("results identical\n");
    return 0;
}
