// geometry.hpp — Closed loops of the coupling axis and rotating-frame fields

#pragma once

#include <array>
#include <string>
#include <vector>

namespace berryloop::geometry {

enum class LoopKind { cap, wobble, piecewise_table };

// Closed path e(t) = (theta(t), phi(t)) traversed over one period t_p.
// cap:    theta = theta0, phi = 2π t/t_p
// wobble: theta = theta0 + A sin(harmonic · phi), phi = 2π t/t_p
// table:  C¹ monotone-cubic interpolation of (t/t_p, theta, phi) nodes
struct LoopSpec {
    LoopKind kind{LoopKind::cap};
    double theta0{1.0471975511965976}; // π/3
    double wobble_amplitude{0.0};
    int wobble_harmonic{2};
    double t_p{1.0};
    bool reverse{false}; // traverse the same path backwards in time
    std::vector<double> u_nodes, theta_nodes, phi_nodes; // piecewise_table, u = t/t_p

    void validate() const;
    // angles and time derivatives at t ∈ [0, t_p]
    void angles(double t, double& theta, double& phi, double& dtheta, double& dphi) const;
};

struct FrameField {
    double omega_x, omega_y, omega_z; // rotating-basis angular velocity
    double omega_perp;                // sqrt(omega_x^2 + omega_y^2)
    double b_x, b_y, b_z;             // lab field in the rotating frame
};

// Rotating-frame quantities at time t for a lab field b_lab.
FrameField frame_field(const LoopSpec& loop, const std::array<double, 3>& b_lab, double t);

// A = ∮ (1 - cosθ) dφ; equals -∫ ω_z dt for every closed loop.
double solid_angle(const LoopSpec& loop);

// unit coupling axis in the lab frame
std::array<double, 3> axis(const LoopSpec& loop, double t);

// SO(3) rotation carrying e(t) to z: Rz(φ) Ry(-θ) Rz(-φ).
std::array<std::array<double, 3>, 3> frame_rotation(double theta, double phi);

// loads 3-column CSV (t, theta, phi) with t in units of t_p ∈ [0, 1]
LoopSpec load_loop_csv(const std::string& path, double t_p);

} // namespace berryloop::geometry
