#include <doctest.h>

#include <cmath>

#include "berryloop/evolve.hpp"

using namespace berryloop;
using evolve::RateMethod;
using evolve::RunConfig;
using spectral::Regime;
using spectral::SpectralModel;

namespace {

SpectralModel bump(double center, double width, double weight, Regime regime = Regime::quantum,
                   double beta = std::numeric_limits<double>::infinity()) {
    SpectralModel m;
    m.kind = spectral::DensityKind::gaussian_bump;
    m.center = center;
    m.width = width;
    m.weight = weight;
    m.regime = regime;
    m.beta_omega_m = (regime == Regime::classical) ? 0.0 : beta;
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

TEST_CASE("static loop with no field does nothing") {
    RunConfig cfg;
    cfg.model = bump(1.0, 0.1, 25.0, Regime::classical);
    cfg.loop = static_axis(50.0);
    const auto r = evolve::integrate_coherence(cfg);
    CHECK(std::abs(r.phi_total) < 1e-9);
    CHECK(std::abs(r.d_total) < 1e-9);
}

TEST_CASE("axial field alone gives the pure dynamic phase") {
    // phase convention: phi_total = -∫(ω_z + b_z) dt, so a field anti-parallel
    // to the axis drives the dynamic phase positive
    const double tp = 40.0;
    RunConfig cfg;
    cfg.model = bump(1.0, 0.1, 25.0, Regime::classical);
    cfg.loop = static_axis(tp);
    cfg.b_lab = {0.0, 0.0, -0.5 / tp};
    const auto r = evolve::integrate_coherence(cfg);
    CHECK(r.phi_total == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::abs(r.d_total) < 1e-10);
    CHECK(r.prediction.phi_dyn == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("classical cap: berry phase plus the quadratic correction") {
    const double tp = 300.0;
    RunConfig cfg;
    cfg.model = bump(1.0, 0.1, 25.0, Regime::classical);
    cfg.loop = cap(M_PI / 3, tp);
    cfg.integrator_tolerance = 1e-11;
    const auto r = evolve::integrate_coherence(cfg);
    const auto c = coupling_constants(cfg.model);
    const double phi_na2 = c.gamma2 * std::pow(2 * M_PI, 3) * std::pow(std::sin(M_PI / 3), 2) *
                           (1 - std::cos(M_PI / 3)) / (tp * tp);
    CHECK(r.phi_total == doctest::Approx(M_PI + phi_na2).epsilon(1e-9));
    CHECK(r.prediction.phi_na2 == doctest::Approx(phi_na2).epsilon(1e-8));
    CHECK(r.prediction.phi_bp == doctest::Approx(M_PI).epsilon(1e-10));
    // leading dephasing: γ₁ (2π)² sin²θ₀ / t_p
    const double d_expect = c.gamma1 * std::pow(2 * M_PI, 2) * 0.75 / tp;
    CHECK(r.d_total == doctest::Approx(d_expect).epsilon(1e-6));
    CHECK(r.prediction.d_na1 == doctest::Approx(d_expect).epsilon(1e-10));
    CHECK(r.rate_evaluations <= 3); // ν constant along a cap: the cache holds
}

TEST_CASE("integrate agrees with predict on validity-flagged configs") {
    for (const auto& model :
         {bump(1.0, 0.1, 25.0, Regime::classical), bump(1.0, 0.08, 40.0, Regime::classical)}) {
        RunConfig cfg;
        cfg.model = model;
        cfg.loop = cap(1.1, 200.0);
        cfg.integrator_tolerance = 1e-11;
        const auto r = evolve::integrate_coherence(cfg);
        const double bound =
            std::max(5.0 * cfg.integrator_tolerance, r.prediction.residual_bound);
        CHECK(std::abs(r.phi_total - r.prediction.phi_total) <= bound);
        CHECK(std::abs(r.d_total - r.prediction.d_total) <= 0.05 * r.prediction.d_total + 1e-12);
        CHECK(r.d_total >= -cfg.integrator_tolerance);
        CHECK(std::abs(r.s_plus_final) <= 0.5 * (1 + cfg.integrator_tolerance));
    }
}

TEST_CASE("kinematic limit: rate forced to zero") {
    RunConfig cfg;
    cfg.model = bump(1.0, 0.1, 25.0, Regime::classical);
    cfg.loop = cap(M_PI / 3, 120.0);
    cfg.b_lab = {0.0, 0.0, 0.002};
    cfg.kernel_method = RateMethod::none;
    cfg.integrator_tolerance = 1e-11;
    const auto r = evolve::integrate_coherence(cfg);
    // exactly -∫(ω_z + b_z) dt = A - ∫b_z dt; for a cap b_z = B cosθ₀
    const double expect = M_PI - 0.002 * std::cos(M_PI / 3) * 120.0;
    CHECK(r.phi_total == doctest::Approx(expect).epsilon(1e-9));
    CHECK(std::abs(r.d_total) < 1e-10);
}

TEST_CASE("time reversal flips the geometric part and keeps the dephasing") {
    RunConfig fwd;
    fwd.model = bump(1.0, 0.1, 25.0, Regime::classical);
    fwd.loop = cap(M_PI / 3, 250.0);
    fwd.integrator_tolerance = 1e-11;
    auto rev = fwd;
    rev.loop.reverse = true;
    const auto a = evolve::integrate_coherence(fwd);
    const auto b = evolve::integrate_coherence(rev);
    CHECK(b.phi_total == doctest::Approx(-a.phi_total).epsilon(1e-9));
    CHECK(b.d_total == doctest::Approx(a.d_total).epsilon(1e-9));
}

TEST_CASE("quantum exponential suppression of dephasing") {
    // G chi1^2 ≈ 51: the closed-form dephasing is essentially zero
    RunConfig cfg;
    cfg.model = bump(1.0, 0.1, 50.0);
    cfg.loop = cap(M_PI / 3, 1000.0);
    const auto p = evolve::predict_closed_form(cfg);
    CHECK(p.d_total <= 1e-9);
    const auto r = evolve::integrate_coherence(cfg);
    CHECK(r.d_total <= 1e-8);
    CHECK(r.phi_total == doctest::Approx(M_PI).epsilon(1e-5));
}

TEST_CASE("prediction pieces for a cap against analytic forms") {
    RunConfig cfg;
    cfg.model = bump(1.0, 0.1, 25.0, Regime::classical);
    cfg.loop = cap(0.9, 150.0);
    const auto c = coupling_constants(cfg.model);
    const auto p = evolve::predict_closed_form(cfg);
    const double tp = 150.0;
    CHECK(p.d_na1 ==
          doctest::Approx(c.gamma1 * std::pow(2 * M_PI * std::sin(0.9), 2) / tp).epsilon(1e-10));
    CHECK(p.phi_bp == doctest::Approx(2 * M_PI * (1 - std::cos(0.9))).epsilon(1e-10));
    CHECK(p.phi_dyn == 0.0);
    CHECK(p.d_dyn == 0.0);
    CHECK(p.d_bp == 0.0);
    CHECK(p.residual_bound ==
          doctest::Approx(c.gamma1 * c.gamma1 * std::pow(2 * M_PI * std::sin(0.9), 3) / (tp * tp))
              .epsilon(1e-10));
}

TEST_CASE("kernel method selection and the trace-kernel fallback") {
    // a broad classical bump fails the gaussian-kernel flag; auto_select must
    // fall back to the trace kernel and still produce a sane decay
    RunConfig cfg;
    cfg.model = bump(1.0, 0.1, 25.0, Regime::classical);
    cfg.model.width = 0.45; // chi4 > 0.3 G
    cfg.model.weight = 2.5;
    cfg.loop = cap(1.0, 60.0);
    const auto c = coupling_constants(cfg.model);
    REQUIRE_FALSE(c.gaussian_kernel_ok);
    cfg.kernel_method = RateMethod::auto_select;
    const auto r = evolve::integrate_coherence(cfg);
    CHECK(r.d_total > 0.0);
    CHECK(std::isfinite(r.phi_total));
    // same run with the gaussian quadrature path tracks the closed forms
    cfg.model = bump(1.0, 0.1, 25.0, Regime::classical);
    cfg.kernel_method = RateMethod::gaussian_quadrature;
    cfg.loop = cap(1.0, 200.0);
    const auto g = evolve::integrate_coherence(cfg);
    CHECK(g.d_total == doctest::Approx(g.prediction.d_total).epsilon(1e-4));
    CHECK(g.phi_total == doctest::Approx(g.prediction.phi_total).epsilon(1e-4));
}

TEST_CASE("bad tolerance is rejected") {
    RunConfig cfg;
    cfg.model = bump(1.0, 0.1, 25.0, Regime::classical);
    cfg.loop = cap(1.0, 10.0);
    cfg.integrator_tolerance = 1e-2;
    CHECK_THROWS_AS(static_cast<void>(evolve::integrate_coherence(cfg)), std::invalid_argument);
}
