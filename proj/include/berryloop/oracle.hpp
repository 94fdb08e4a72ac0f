// oracle.hpp — Brute-force classical-noise Monte Carlo ground truth

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "berryloop/geometry.hpp"
#include "berryloop/spectral.hpp"

namespace berryloop::oracle {

// Ensemble noise power per unit G_dis: Σ⟨A_j²⟩ = kNoisePowerCalibration · G Ω_m².
// Fixed by matching the measured loop dephasing of the ensemble to the
// closed-form rate γ₁∫ω_⊥²dt, then frozen; asserted by unit test.
inline constexpr double kNoisePowerCalibration = 0.125;

struct NoiseMode {
    double omega;  // rad/time, > 0
    double amp;    // drawn Gaussian, variance Σ⟨A²⟩/n_modes
    double phase;  // uniform [0, 2π)
};

struct NoiseRealization {
    std::vector<NoiseMode> modes;
    std::uint64_t seed;

    double xi(double t) const;            // Σ a_j cos(Ω_j t + φ_j)
    double xi_integral(double a, double b) const; // ∫_a^b ξ dt, closed form
};

enum class Readout {
    dressed, // rotating-frame coherence with the axial noise phase removed
    bare     // plain rotating-frame coherence
};

struct EnsembleConfig {
    spectral::SpectralModel model; // classical regime
    geometry::LoopSpec loop;
    std::array<double, 3> b_lab{0.0, 0.0, 0.0};
    int n_modes{64};
    int n_realizations{4000};
    std::uint64_t base_seed{1};
    double dt_max{0.0};   // 0 → derived from max(Ω_j, 3ξ_rms)
    int n_checkpoints{64};
    Readout readout{Readout::dressed};
    int bootstrap_resamples{256};
    bool parallel{true};
    bool keep_realizations{false}; // retain per-realization coherences in the estimate
};

struct RealizationResult {
    std::complex<double> s_plus;                  // coherence at t_p
    std::vector<std::complex<double>> checkpoints; // coherence at k t_p/K, k=0..K
    double norm_drift;                             // max |‖ψ‖-1| over the run
};

struct EnsembleEstimate {
    std::complex<double> mean_s_plus;
    double phi_mc;       // -arg⟨s′₊⟩ relative to start, unwrapped via checkpoints
    double d_mc;         // -ln(|⟨s′₊⟩| / |s′₊(0)|)
    double stderr_phi, stderr_d; // bootstrap
    int n_realizations;
    int n_modes;
    double dt_used;
    double max_norm_drift;
    std::vector<std::complex<double>> mean_checkpoints;
    std::vector<std::complex<double>> realization_s_plus; // when keep_realizations
};

// Gaussian amplitudes on an equal-weight Ω-stratification of j_cl.
NoiseRealization sample_realization(const spectral::SpectralModel& model, int n_modes,
                                    std::uint64_t seed);

// Same draw from a precomputed stratification (ensemble loops reuse it).
NoiseRealization sample_from_strata(const spectral::DiscreteModes& strata, double sum_a2,
                                    std::uint64_t seed);

// Lab-frame Schrödinger evolution under one realization; exact-unitary
// midpoint steps; coherence read out in the rotating basis.
RealizationResult integrate_realization(const NoiseRealization& real,
                                        const geometry::LoopSpec& loop,
                                        const std::array<double, 3>& b_lab, double dt_max,
                                        int n_checkpoints, Readout readout);

EnsembleEstimate ensemble_average(const EnsembleConfig& cfg);

} // namespace berryloop::oracle
