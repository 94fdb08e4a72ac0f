#include "berryloop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "berryloop/quadrature.hpp"

namespace berryloop::geometry {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Fritsch-Carlson monotone cubic slopes; gives C¹ interpolation with no
// spurious derivative spikes between nodes.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), d(n - 1), m(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        d[i] = (y[i + 1] - y[i]) / h[i];
    }
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            m[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    return m;
}

struct CubicEval {
    double value, deriv;
};

CubicEval pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& m, double u) {
    const auto it = std::upper_bound(x.begin(), x.end(), u);
    std::size_t i = (it == x.begin()) ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    i = std::min(i, x.size() - 2);
    const double h = x[i + 1] - x[i];
    const double t = (u - x[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double v = h00 * y[i] + h10 * h * m[i] + h01 * y[i + 1] + h11 * h * m[i + 1];
    const double dh00 = 6 * t2 - 6 * t, dh10 = 3 * t2 - 4 * t + 1;
    const double dh01 = -6 * t2 + 6 * t, dh11 = 3 * t2 - 2 * t;
    const double dv = (dh00 * y[i] + dh01 * y[i + 1]) / h + dh10 * m[i] + dh11 * m[i + 1];
    return {v, dv};
}

} // namespace

void LoopSpec::validate() const {
    if (!(t_p > 0.0)) throw std::invalid_argument("loop: t_p must be > 0");
    if (kind == LoopKind::piecewise_table) {
        if (u_nodes.size() < 3 || u_nodes.size() != theta_nodes.size() ||
            u_nodes.size() != phi_nodes.size())
            throw std::invalid_argument("loop table: need >= 3 (t, theta, phi) rows");
        if (std::abs(u_nodes.front()) > 1e-12 || std::abs(u_nodes.back() - 1.0) > 1e-12)
            throw std::invalid_argument("loop table: t/t_p must span [0, 1]");
        for (std::size_t i = 1; i < u_nodes.size(); ++i)
            if (!(u_nodes[i] > u_nodes[i - 1]))
                throw std::invalid_argument("loop table: times must be strictly increasing");
        if (std::abs(theta_nodes.back() - theta_nodes.front()) > 1e-9)
            throw std::runtime_error("loop closure error: theta(t_p) != theta(0)");
        const double dphi = phi_nodes.back() - phi_nodes.front();
        if (std::abs(dphi - kTwoPi * std::round(dphi / kTwoPi)) > 1e-9)
            throw std::runtime_error("loop closure error: phi(t_p) - phi(0) not a multiple of 2π");
        for (double th : theta_nodes)
            if (th < -1e-12 || th > 3.14159265358979323846 + 1e-12)
                throw std::invalid_argument("loop table: theta outside [0, π]");
    } else {
        if (theta0 < 0.0 || theta0 > 3.14159265358979323846)
            throw std::invalid_argument("loop: theta0 outside [0, π]");
        if (kind == LoopKind::wobble) {
            const double lo = theta0 - std::abs(wobble_amplitude);
            const double hi = theta0 + std::abs(wobble_amplitude);
            if (lo < 0.0 || hi > 3.14159265358979323846)
                throw std::invalid_argument("wobble loop leaves theta range [0, π]");
        }
    }
}

void LoopSpec::angles(double t, double& theta, double& phi, double& dtheta, double& dphi) const {
    if (t < -1e-12 * t_p || t > t_p * (1.0 + 1e-12))
        throw std::domain_error("loop: t outside [0, t_p]");
    double u = std::clamp(t / t_p, 0.0, 1.0);
    double sgn = 1.0;
    if (reverse) {
        u = 1.0 - u;
        sgn = -1.0;
    }
    switch (kind) {
        case LoopKind::cap:
            theta = theta0;
            phi = kTwoPi * u;
            dtheta = 0.0;
            dphi = sgn * kTwoPi / t_p;
            break;
        case LoopKind::wobble: {
            phi = kTwoPi * u;
            dphi = sgn * kTwoPi / t_p;
            theta = theta0 + wobble_amplitude * std::sin(wobble_harmonic * phi);
            dtheta = wobble_amplitude * wobble_harmonic * std::cos(wobble_harmonic * phi) * dphi;
            break;
        }
        case LoopKind::piecewise_table: {
            // tables are small; recomputing slopes keeps the type immutable
            const auto mtheta = pchip_slopes(u_nodes, theta_nodes);
            const auto mphi = pchip_slopes(u_nodes, phi_nodes);
            const auto th = pchip_eval(u_nodes, theta_nodes, mtheta, u);
            const auto ph = pchip_eval(u_nodes, phi_nodes, mphi, u);
            theta = th.value;
            phi = ph.value;
            dtheta = sgn * th.deriv / t_p;
            dphi = sgn * ph.deriv / t_p;
            break;
        }
    }
}

std::array<std::array<double, 3>, 3> frame_rotation(double theta, double phi) {
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double ct = std::cos(theta), st = std::sin(theta);
    // Rz(φ) Ry(-θ) Rz(-φ)
    std::array<std::array<double, 3>, 3> r{};
    r[0] = {cp * cp * ct + sp * sp, cp * sp * ct - cp * sp, -cp * st};
    r[1] = {cp * sp * ct - cp * sp, sp * sp * ct + cp * cp, -sp * st};
    r[2] = {cp * st, sp * st, ct};
    return r;
}

std::array<double, 3> axis(const LoopSpec& loop, double t) {
    double theta, phi, dth, dph;
    loop.angles(t, theta, phi, dth, dph);
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

FrameField frame_field(const LoopSpec& loop, const std::array<double, 3>& b_lab, double t) {
    loop.validate();
    double theta, phi, dtheta, dphi;
    loop.angles(t, theta, phi, dtheta, dphi);
    FrameField f{};
    const double st = std::sin(theta), ct = std::cos(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);
    f.omega_x = -dphi * st * cp - dtheta * sp;
    f.omega_y = -dphi * st * sp + dtheta * cp;
    f.omega_z = -dphi * (1.0 - ct);
    f.omega_perp = std::hypot(f.omega_x, f.omega_y);
    const auto r = frame_rotation(theta, phi);
    f.b_x = r[0][0] * b_lab[0] + r[0][1] * b_lab[1] + r[0][2] * b_lab[2];
    f.b_y = r[1][0] * b_lab[0] + r[1][1] * b_lab[1] + r[1][2] * b_lab[2];
    f.b_z = r[2][0] * b_lab[0] + r[2][1] * b_lab[1] + r[2][2] * b_lab[2];
    return f;
}

double solid_angle(const LoopSpec& loop) {
    loop.validate();
    return quad::integrate<double>(
        [&](double t) {
            double theta, phi, dth, dph;
            loop.angles(t, theta, phi, dth, dph);
            return (1.0 - std::cos(theta)) * dph;
        },
        0.0, loop.t_p, quad::Options{1e-10, 1e-10, 48});
}

LoopSpec load_loop_csv(const std::string& path, double t_p) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open loop table: " + path);
    LoopSpec loop;
    loop.kind = LoopKind::piecewise_table;
    loop.t_p = t_p;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double u, th, ph;
        if (!(row >> u >> th >> ph)) throw std::runtime_error("loop table: bad row '" + line + "'");
        loop.u_nodes.push_back(u);
        loop.theta_nodes.push_back(th);
        loop.phi_nodes.push_back(ph);
    }
    loop.validate();
    return loop;
}

} // namespace berryloop::geometry
