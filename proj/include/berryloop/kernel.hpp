// kernel.hpp — Bath correlation kernels, the I(b) transform, and rates

#pragma once

#include <complex>

#include "berryloop/spectral.hpp"

namespace berryloop::kernel {

enum class KernelMethod { exact_trace, gaussian };

struct KernelEvaluation {
    double tau;
    double a_even_sym, a_even_asym;
    double a_odd_sym, a_odd_asym;
    KernelMethod method;
};

// f(τ): the mode-sum correlation exponent, normalized so f(0) = F.
// Quantum: ∫ j(x) x^{-2} [e^{-iΩ_m τ x} + e^{iΩ_m τ x - βΩ_m x}] / (1 - e^{-βΩ_m x}) dx
// Classical: ∫ j_cl(x) x^{-2} cos(Ω_m τ x) dx
std::complex<double> f_exact(const spectral::SpectralModel& model, double tau);

// Trace kernels: even = e^{-2F}(cosh 2f - 1), odd = e^{-2F} sinh 2f;
// sym/asym are the real/imaginary parts. Evaluated through e^{2(f-F)} so
// large F cannot overflow.
KernelEvaluation kernel_exact(const spectral::SpectralModel& model, double tau);
KernelEvaluation kernel_exact_from_f(std::complex<double> f, double franck_condon_f, double tau);

// Gaussian kernel: A = ½ exp[-½G((Ω_m τ)^2 + 2iχ₁Ω_m τ)]; even = odd.
KernelEvaluation kernel_gaussian(const spectral::CouplingConstants& c, double tau);

// I(b): Gaussian transform with exponent -½G[(Ω_m τ)^2 + 2i(χ₁+b)Ω_m τ].
// The real part is the full-line (even-extension) value — exactly twice the
// half-line real part — and the imaginary part is the half-line odd part.
struct IbResult {
    std::complex<double> value;  // quadrature
    double re_closed;            // √π e^{-G(χ₁+b)²/2} / (Ω_m √(G/2))
    double im_closed;            // quantum: -1/(Ω_m G(χ₁+b)); classical: 2b/(Ω_m G)
};
IbResult i_integral(const spectral::CouplingConstants& c, double b);

std::complex<double> i_integral_quadrature(const spectral::CouplingConstants& c, double b);
double re_closed_form(const spectral::CouplingConstants& c, double b);
double im_closed_form(const spectral::CouplingConstants& c, double b);

// Λ(ω_z) = ¼[I(b) + I*(-b)], b = ω_z/(2GΩ_m) — the stationary kernel
// transform per unit ω_⊥² (quadrature-backed).
std::complex<double> complex_rate(const spectral::CouplingConstants& c, double omega_z);

// Rate entering the coherence equation: the conjugate-pair recombination
// [ReI(b)+ReI(-b)] - ½i[ImI(b)-ImI(-b)], with constants pinned so that
// ds/dt = [iν - ½ω̃_⊥² Λ_rate(ν)] s integrates to the closed-form phase
// and dephasing (Re → 2γ₁e^{-Gχ₁²/2}, Im → -2γ₂ν as ν → 0).
std::complex<double> coherence_rate(const spectral::CouplingConstants& c, double nu);

// Same recombination applied to a numerically tabulated kernel A^sym(τ):
// 8∫A cos(ντ/2)dτ + 2i∫A sin(ντ/2)dτ. Used for the exact-trace and
// quadrature kernel paths of the evolver.
class TabulatedRate {
public:
    TabulatedRate(const spectral::SpectralModel& model, KernelMethod method);
    std::complex<double> operator()(double nu) const;

private:
    std::vector<double> tau_, a_sym_;
};

// Shifted-oscillator overlap to O(α²): Δm=0 → 1-(m+½)α²; Δm=-1 → √m α;
// Δm=+1 → -√(m+1) α.
double mode_overlap(int m, double alpha, int delta_m);

} // namespace berryloop::kernel
