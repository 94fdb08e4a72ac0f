// decompose.hpp — Scaling-exponent regression over loop-period families

#pragma once

#include <map>
#include <string>
#include <vector>

namespace berryloop::decompose {

// Least squares in the basis {t_p, 1, t_p^{-1}, t_p^{-2}}.
struct ScalingFit {
    std::map<int, double> coefficients;  // exponent -> value
    std::map<int, double> stderrs;       // exponent -> standard error
    double residual_rms{0.0};
    double condition_number{0.0};
    std::vector<double> tp_grid;
    int dof{0};
};

struct Sample {
    double t_p;
    double y;
};

ScalingFit fit_scaling(const std::vector<Sample>& values);

// log-log slope of |y - offset| vs t_p (scaling-exponent extraction)
double loglog_exponent(const std::vector<Sample>& values, double offset);

struct PhaseDecomposition {
    // phase labels
    double phi_dyn_density;  // t_p coefficient
    double phi_bp;           // t_p^0
    double phi_na1;          // t_p^{-1}
    double phi_na2;          // t_p^{-2}
    // dephasing labels
    double d_dyn_density;
    double d_bp;
    double d_na1;
    // zero-consistency report for B = 0 families
    struct Check {
        std::string name;
        double value, tolerance;
        bool pass;
    };
    std::vector<Check> checks;
    bool b_field_present{false}; // flagged: t_p^0 phase may carry O(γ₂B²ω) contamination
};

// Labels the fitted coefficients; `zero_floor` guards the consistency checks
// against exactly-resolved families where the LSQ standard error collapses.
PhaseDecomposition decompose_phases(const ScalingFit& phi_fit, const ScalingFit& d_fit,
                                    bool b_field_present, double zero_floor);

} // namespace berryloop::decompose
