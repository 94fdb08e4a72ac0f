// bench_oracle — serial vs OpenMP ensemble throughput, with an equality check.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "berryloop/oracle.hpp"

using namespace berryloop;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    oracle::EnsembleConfig cfg;
    cfg.model.kind = spectral::DensityKind::gaussian_bump;
    cfg.model.center = 1.0;
    cfg.model.width = 0.4;
    cfg.model.weight = 400.0;
    cfg.model.regime = spectral::Regime::classical;
    cfg.model.beta_omega_m = 0.0;
    cfg.loop.kind = geometry::LoopKind::cap;
    cfg.loop.theta0 = 1.3962634015954636;
    cfg.loop.t_p = 16.0;
    cfg.n_modes = 64;
    cfg.n_realizations = (argc > 1) ? std::atoi(argv[1]) : 2000;
    cfg.base_seed = 7777;

    std::printf("ensemble: M=%d, %d modes, t_p=%.1f\n", cfg.n_realizations, cfg.n_modes,
                cfg.loop.t_p);

    cfg.parallel = false;
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = oracle::ensemble_average(cfg);
    const double t_serial = seconds_since(t0);

    cfg.parallel = true;
    t0 = std::chrono::steady_clock::now();
    const auto parallel = oracle::ensemble_average(cfg);
    const double t_parallel = seconds_since(t0);

    const bool identical = serial.mean_s_plus == parallel.mean_s_plus &&
                           serial.phi_mc == parallel.phi_mc && serial.d_mc == parallel.d_mc;
    std::printf("serial   : %8.3f s  (%.0f realizations/s)\n", t_serial,
                cfg.n_realizations / t_serial);
    std::printf("parallel : %8.3f s  (%.0f realizations/s)\n", t_parallel,
                cfg.n_realizations / t_parallel);
    std::printf("speedup  : %8.2fx\n", t_serial / t_parallel);
    std::printf("results  : %s (phi=%.6f d=%.6f)\n",
                identical ? "bit-identical" : "MISMATCH", serial.phi_mc, serial.d_mc);
    return identical ? 0 : 1;
}
