// spectral.hpp — Environment spectral densities and derived coupling constants

#pragma once

#include <array>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace berryloop::spectral {

enum class DensityKind { gaussian_bump, lorentzian_bump, tabulated };
enum class Regime { quantum, classical };

// Dimensionless coupling density j(x), x = Omega/Omega_m. In the classical
// regime the stored density is j_cl directly. Models produced by
// classical_limit() keep the original shape and evaluate j(x)/(beta0 * x).
struct SpectralModel {
    DensityKind kind{DensityKind::gaussian_bump};
    double center{1.0};        // units of Omega_m
    double width{0.1};         // units of Omega_m
    double weight{1.0};        // sets ∫ j dx
    double omega_m{1.0};       // rad/time; the unit scale
    double beta_omega_m{std::numeric_limits<double>::infinity()}; // βΩ_m; ∞ = T=0
    Regime regime{Regime::quantum};
    std::vector<double> table_x, table_j; // tabulated kind
    double inv_beta_x_scale{0.0}; // >0: evaluate base density / (scale * x)

    void validate() const;
    // support of the density, for quadrature seeding
    std::array<double, 2> support() const;
};

struct CouplingConstants {
    double g_dis{0.0};
    std::map<int, double> chi;    // n in {0..4}
    double franck_condon_f{0.0};  // F = chi0 * g_dis
    double gamma1{0.0};           // time
    double gamma2{0.0};           // time^2
    double omega_m{1.0};
    Regime regime{Regime::quantum};
    bool gaussian_kernel_ok{false};
    bool exponential_dephasing_suppression_ok{false};
    bool franck_condon_large{false};
    bool weak_coupling{false};    // warning: analysis assumes g_dis >> 1

    bool all_ok() const {
        return gaussian_kernel_ok && franck_condon_large && !weak_coupling;
    }
};

// j(x); zero for x <= 0.
double eval_density(const SpectralModel& model, double x);

// chi_n = G^{-1} ∫ j(x) x^{n-2} [bracket] dx; bracket = 1 (odd n) or
// coth(βΩ_m x/2) (even n). Classical: even moments of j_cl, odd moments 0.
double chi_moment(const SpectralModel& model, int n);

CouplingConstants coupling_constants(const SpectralModel& model);

// Classical model with j_cl(x) = j(x)/(βΩ_m x), β taken from the quantum model.
SpectralModel classical_limit(const SpectralModel& model);

SpectralModel load_tabulated_csv(const std::string& path, double omega_m, Regime regime);

// Equal-weight stratification of the density into discrete modes.
struct DiscreteModes {
    std::vector<double> omega;   // rad/time, strictly increasing
    std::vector<double> weight;  // ∫j over stratum (sums to G in classical regime)
};
DiscreteModes discretize(const SpectralModel& model, int n_modes);

// Bookkeeping probe: ratios between the discrete-sum and continuum-integral
// definitions of the coupling constants. Constant across models (≈ 1/π for
// G, 1/2π for F); asserted by tests, never assumed equal to one.
struct DiscretizationDiagnostic {
    double g_ratio;
    double f_ratio;
};
DiscretizationDiagnostic discretization_diagnostic(const SpectralModel& model, int n_modes);

} // namespace berryloop::spectral
