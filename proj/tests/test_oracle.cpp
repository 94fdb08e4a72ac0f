#include <doctest.h>

#include <cmath>
#include <complex>

#include "berryloop/evolve.hpp"
#include "berryloop/oracle.hpp"
#include "berryloop/rng.hpp"

using namespace berryloop;
using oracle::EnsembleConfig;
using oracle::Readout;
using spectral::Regime;
using spectral::SpectralModel;

namespace {

SpectralModel classical_bump(double center, double width, double weight) {
    SpectralModel m;
    m.kind = spectral::DensityKind::gaussian_bump;
    m.center = center;
    m.width = width;
    m.weight = weight;
    m.regime = Regime::classical;
    m.beta_omega_m = 0.0;
    return m;
}

geometry::LoopSpec cap(double theta0, double tp) {
    geometry::LoopSpec l;
    l.kind = geometry::LoopKind::cap;
    l.theta0 = theta0;
    l.t_p = tp;
    return l;
}

geometry::LoopSpec static_axis(double tp) {
    geometry::LoopSpec l;
    l.kind = geometry::LoopKind::piecewise_table;
    l.t_p = tp;
    l.u_nodes = {0.0, 0.5, 1.0};
    l.theta_nodes = {0.0, 0.0, 0.0};
    l.phi_nodes = {0.0, 0.0, 0.0};
    return l;
}

} // namespace

TEST_CASE("sampling is deterministic and seed-sensitive") {
    const auto m = classical_bump(1.0, 0.15, 25.0);
    const auto a = oracle::sample_realization(m, 16, 77);
    const auto b = oracle::sample_realization(m, 16, 77);
    const auto c = oracle::sample_realization(m, 16, 78);
    REQUIRE(a.modes.size() == 16);
    bool same = true, differ = false;
    for (int i = 0; i < 16; ++i) {
        same = same && a.modes[i].amp == b.modes[i].amp && a.modes[i].phase == b.modes[i].phase;
        differ = differ || a.modes[i].amp != c.modes[i].amp;
        CHECK(a.modes[i].omega > 0.0);
        if (i > 0) CHECK(a.modes[i].omega > a.modes[i - 1].omega);
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("rejects quantum models") {
    SpectralModel m = classical_bump(1.0, 0.15, 25.0);
    m.regime = Regime::quantum;
    m.beta_omega_m = 1.0;
    CHECK_THROWS_AS(static_cast<void>(oracle::sample_realization(m, 8, 1)),
                    std::invalid_argument);
}

TEST_CASE("zero-weight density gives zero amplitudes") {
    const auto m = classical_bump(1.0, 0.1, 0.0);
    const auto r = oracle::sample_realization(m, 8, 5);
    for (const auto& mode : r.modes) CHECK(mode.amp == 0.0);
    CHECK(r.xi(0.7) == 0.0);
}

TEST_CASE("noise power calibration: sum of mode variances is G/8 in units of Omega_m^2") {
    const auto m = classical_bump(1.0, 0.02, 25.0);
    const double target = oracle::kNoisePowerCalibration * 25.0;
    const int trials = 20000, n_modes = 4;
    const auto strata = spectral::discretize(m, n_modes);
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto r = oracle::sample_from_strata(strata, target, rng::stream_seed(404, t));
        for (const auto& mode : r.modes) acc += mode.amp * mode.amp;
    }
    const double measured = acc / trials;
    // χ²-mean relative stderr: sqrt(2 / (trials · n_modes))
    const double rel_se = std::sqrt(2.0 / (trials * n_modes));
    CHECK(std::abs(measured / target - 1.0) <= 4.0 * rel_se);
    // the public sampler carries the same frozen constant (up to the
    // quadrature tolerance on ∫j)
    const auto pub = oracle::sample_realization(m, n_modes, 404);
    const auto direct = oracle::sample_from_strata(strata, target, 404);
    for (int j = 0; j < n_modes; ++j)
        CHECK(pub.modes[j].amp == doctest::Approx(direct.modes[j].amp).epsilon(1e-9));
}

TEST_CASE("ensemble autocorrelation matches the mode sum") {
    const auto m = classical_bump(1.0, 0.15, 25.0);
    const int trials = 4000, n_modes = 32;
    const auto strata = spectral::discretize(m, n_modes);
    const double scale = oracle::kNoisePowerCalibration * 25.0;
    for (double tau : {0.0, 0.9, 2.2}) {
        double sampled = 0.0, exact = 0.0;
        for (int t = 0; t < trials; ++t) {
            const auto r = oracle::sample_from_strata(strata, scale, rng::stream_seed(808, t));
            sampled += r.xi(0.0) * r.xi(tau);
            if (t == 0)
                for (const auto& mode : r.modes)
                    exact += 0.5 * (scale / n_modes) * std::cos(mode.omega * tau);
        }
        sampled /= trials;
        CHECK(std::abs(sampled - exact) <= 4.0 * scale / std::sqrt(static_cast<double>(trials)));
    }
}

TEST_CASE("single realization integration is deterministic and unitary") {
    const auto m = classical_bump(1.0, 0.15, 100.0);
    const auto real = oracle::sample_realization(m, 32, 12345);
    const auto loop = cap(1.2, 10.0);
    const auto a = oracle::integrate_realization(real, loop, {0, 0, 0}, 0.005, 16,
                                                 Readout::dressed);
    const auto b = oracle::integrate_realization(real, loop, {0, 0, 0}, 0.005, 16,
                                                 Readout::dressed);
    CHECK(a.s_plus == b.s_plus);
    CHECK(a.norm_drift <= 1e-10);
    CHECK(std::abs(a.checkpoints.front() - std::complex<double>(0.5, 0.0)) < 1e-14);
}

TEST_CASE("static axis, bare readout: gaussian short-time decay") {
    // |⟨s⟩| should fall like exp(-½∬C) with ∬C = Σ⟨A²⟩(1-cos Ω t_p)/Ω²
    const auto m = classical_bump(1.0, 0.15, 25.0);
    const double tp = 6.0;
    EnsembleConfig cfg;
    cfg.model = m;
    cfg.loop = static_axis(tp);
    cfg.n_modes = 128;
    cfg.n_realizations = 2000;
    cfg.base_seed = 2212;
    cfg.readout = Readout::bare;
    const auto est = oracle::ensemble_average(cfg);

    const auto strata = spectral::discretize(m, cfg.n_modes);
    const double a2 = oracle::kNoisePowerCalibration * 25.0 / cfg.n_modes;
    double phi2 = 0.0;
    for (double w : strata.omega) phi2 += a2 * (1.0 - std::cos(w * tp)) / (w * w);
    CHECK(est.d_mc == doctest::Approx(0.5 * phi2).epsilon(0.06));
    // and the dressed readout removes that decay entirely
    cfg.readout = Readout::dressed;
    const auto dressed = oracle::ensemble_average(cfg);
    CHECK(std::abs(dressed.d_mc) < 1e-3);
    CHECK(std::abs(dressed.phi_mc) < 1e-3);
}

TEST_CASE("parallel and serial ensembles are bit-identical") {
    EnsembleConfig cfg;
    cfg.model = classical_bump(1.0, 0.15, 100.0);
    cfg.loop = cap(1.2, 8.0);
    cfg.n_modes = 16;
    cfg.n_realizations = 64;
    cfg.base_seed = 31;
    cfg.parallel = true;
    const auto a = oracle::ensemble_average(cfg);
    cfg.parallel = false;
    const auto b = oracle::ensemble_average(cfg);
    CHECK(a.mean_s_plus.real() == b.mean_s_plus.real());
    CHECK(a.mean_s_plus.imag() == b.mean_s_plus.imag());
    CHECK(a.phi_mc == b.phi_mc);
    CHECK(a.stderr_d == b.stderr_d);
}

TEST_CASE("step-size independence and stderr scaling") {
    EnsembleConfig cfg;
    cfg.model = classical_bump(1.0, 0.15, 400.0);
    cfg.loop = cap(1.396, 8.0);
    cfg.n_modes = 32;
    cfg.n_realizations = 400;
    cfg.base_seed = 99;
    const auto est1 = oracle::ensemble_average(cfg);
    cfg.dt_max = 0.5 * est1.dt_used;
    const auto est2 = oracle::ensemble_average(cfg);
    CHECK(std::abs(est2.phi_mc - est1.phi_mc) < est1.stderr_phi);
    CHECK(std::abs(est2.d_mc - est1.d_mc) < est1.stderr_d);

    cfg.dt_max = 0.0;
    cfg.n_realizations = 100;
    const auto small = oracle::ensemble_average(cfg);
    const double ratio = small.stderr_d / est1.stderr_d; // expect ≈ 2 for M/4
    CHECK(ratio > 1.2);
    CHECK(ratio < 3.4);
}

TEST_CASE("rotating cap reproduces the closed forms at reduced statistics") {
    EnsembleConfig cfg;
    cfg.model = classical_bump(1.0, 0.15, 1600.0);
    cfg.loop = cap(1.3962634015954636, 8.0); // 80 degrees
    cfg.n_modes = 64;
    cfg.n_realizations = 600;
    cfg.base_seed = 20260809;
    const auto est = oracle::ensemble_average(cfg);

    evolve::RunConfig rc;
    rc.model = cfg.model;
    rc.loop = cfg.loop;
    const auto p = evolve::predict_closed_form(rc);
    CHECK(std::abs(est.d_mc - p.d_total) <= 3.0 * est.stderr_d + 0.05 * p.d_total);
    CHECK(std::abs(est.phi_mc - p.phi_total) <= 3.0 * est.stderr_phi + 0.02 * p.phi_bp);
}

TEST_CASE("negative control: no noise, no adiabatic following") {
    EnsembleConfig cfg;
    cfg.model = classical_bump(1.0, 0.1, 0.0); // zero noise power
    cfg.loop = cap(M_PI / 3, 300.0);
    cfg.n_modes = 16;
    cfg.n_realizations = 100;
    cfg.base_seed = 7;
    const auto est = oracle::ensemble_average(cfg);
    const double area = geometry::solid_angle(cfg.loop);
    CHECK(std::abs(est.phi_mc - area) > 0.3);
}
