// Timing comparison of the OpenMP kernels against their serial reference
// implementations: reset-rate landscape, shot sampling and classification.

#include <chrono>
#include <cstdio>

#include <omp.h>

#include "qreset/effective.hpp"
#include "qreset/readout.hpp"
#include "qreset/virtual_lab.hpp"

using namespace qreset;

namespace {

template <class F>
double time_ms(F&& f, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-22s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());

    // Landscape grid
    std::vector<Frequency> g_axis, ef_axis;
    for (double g = 0.05; g <= 6.0; g += 0.05) g_axis.push_back(Frequency::from_mhz(g));
    for (double e = 0.05; e <= 4.0; e += 0.05) ef_axis.push_back(Frequency::from_mhz(e));
    const Frequency kappa = Frequency::from_mhz(9.0);
    report("landscape 120x80",
           time_ms([&] { landscape_serial(g_axis, ef_axis, kappa); }),
           time_ms([&] { landscape(g_axis, ef_axis, kappa); }));

    // Shot sampling
    const LabTruth truth = default_lab_truth(1);
    const Eigen::Vector3d pops(0.90, 0.07, 0.03);
    const int n_shots = 2'000'000;
    report("sample_shots 2M",
           time_ms([&] { sample_shots_serial(pops, truth.gmm, n_shots, 1); }),
           time_ms([&] { sample_shots(pops, truth.gmm, n_shots, 1); }));

    // Classification
    const ShotSet shots = sample_shots(pops, truth.gmm, n_shots, 1);
    GmmModel model;
    model.means = truth.gmm.means;
    model.sigma = truth.gmm.sigma;
    model.weights = Eigen::Matrix3d::Identity();
    report("classify 2M",
           time_ms([&] { classify_batch_serial(model, shots.points); }),
           time_ms([&] { classify_batch(model, shots.points); }));
    return 0;
}
