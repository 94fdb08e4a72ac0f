// evolve.hpp — Rotating-frame coherence evolution and closed-form predictions

#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "berryloop/geometry.hpp"
#include "berryloop/kernel.hpp"
#include "berryloop/spectral.hpp"

namespace berryloop::evolve {

enum class RateMethod {
    auto_select,          // closed_form when the gaussian-kernel flag holds, else exact_trace
    closed_form,          // closed-form Gaussian-kernel rates (fast default)
    gaussian_quadrature,  // same kernel, numerically transformed
    exact_trace,          // trace kernel, numerically transformed
    none                  // rate forced to zero (kinematic limit)
};

struct RunConfig {
    spectral::SpectralModel model;
    geometry::LoopSpec loop;
    std::array<double, 3> b_lab{0.0, 0.0, 0.0};
    RateMethod kernel_method{RateMethod::closed_form};
    double integrator_tolerance{1e-10};
    bool store_trace{false};

    void validate() const;
};

struct TraceRow {
    double t;
    double re_s, im_s;
    double omega_z, omega_perp;
};

// Closed-form integrals of the coherence equation and their labeled pieces.
// Phase convention: phi = -∫ν dt - γ₂∫ω̃_⊥² ν dt with ν = ω_z + b_z, so a
// counter-clockwise cap acquires +A.
struct Prediction {
    double phi_total, d_total;
    double phi_dyn;       // -∫ b_z dt
    double phi_bp;        // -∫ ω_z dt  (= solid angle)
    double phi_na2;       // -γ₂ ∫ ω̃_⊥² ν dt
    double d_dyn;         // γ₁ e^{-Gχ₁²/2} ∫ (b_x²+b_y²) dt
    double d_bp;          // γ₁ e^{-Gχ₁²/2} ∫ 2(b_x ω_x + b_y ω_y) dt
    double d_na1;         // γ₁ e^{-Gχ₁²/2} ∫ ω_⊥² dt
    double residual_bound; // unmodeled ω_⊥³ envelope: γ₁² ∫ ω̃_⊥³ dt
};

struct RunResult {
    std::complex<double> s_plus_final;
    double phi_total;      // -arg(s(t_p)/s(0)), unwrapped along the trajectory
    double d_total;        // -ln |s(t_p)/s(0)|
    Prediction prediction;
    std::vector<TraceRow> trace;
    int rate_evaluations{0};
    int steps{0};
};

Prediction predict_closed_form(const RunConfig& cfg);

RunResult integrate_coherence(const RunConfig& cfg);

} // namespace berryloop::evolve
