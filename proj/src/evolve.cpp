#include "berryloop/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "berryloop/quadrature.hpp"

namespace berryloop::evolve {

namespace {

using cplx = std::complex<double>;

struct RateSource {
    const spectral::CouplingConstants* constants{nullptr};
    const kernel::TabulatedRate* table{nullptr};
    RateMethod method;
    // cache: rate recomputed only when ν moves by more than 1e-3 Ω_m
    mutable double nu_last{std::numeric_limits<double>::quiet_NaN()};
    mutable cplx rate_last{0.0, 0.0};
    mutable int evaluations{0};

    cplx operator()(double nu) const {
        if (method == RateMethod::none) return {0.0, 0.0};
        if (!std::isnan(nu_last) && std::abs(nu - nu_last) <= 1e-3 * constants->omega_m)
            return rate_last;
        ++evaluations;
        nu_last = nu;
        rate_last = (method == RateMethod::closed_form) ? kernel::coherence_rate(*constants, nu)
                                                        : (*table)(nu);
        return rate_last;
    }
};

// ds/dt = μ(t) s with μ = iν - ½ ω̃_⊥² Λ_rate(ν)
cplx mu_at(const RunConfig& cfg, const RateSource& rate, double t) {
    const auto f = geometry::frame_field(cfg.loop, cfg.b_lab, t);
    const double nu = f.omega_z + f.b_z;
    const double wx = f.omega_x + f.b_x;
    const double wy = f.omega_y + f.b_y;
    const double perp2 = wx * wx + wy * wy;
    const cplx lam = rate(nu);
    return cplx(0.0, nu) - 0.5 * perp2 * lam;
}

// Dormand-Prince 5(4) coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

} // namespace

void RunConfig::validate() const {
    model.validate();
    loop.validate();
    if (!(integrator_tolerance > 0.0) || integrator_tolerance > 1e-3)
        throw std::invalid_argument("integrator_tolerance must lie in (0, 1e-3]");
}

Prediction predict_closed_form(const RunConfig& cfg) {
    cfg.validate();
    const auto c = coupling_constants(cfg.model);
    const double chi1 = c.chi.at(1);
    const double suppress = std::exp(-0.5 * c.g_dis * chi1 * chi1);
    const double tp = cfg.loop.t_p;
    const quad::Options opt{1e-13, 1e-11, 48};

    auto loop_integral = [&](auto integrand) {
        return quad::integrate<double>(
            [&](double t) {
                const auto f = geometry::frame_field(cfg.loop, cfg.b_lab, t);
                return integrand(f);
            },
            0.0, tp, opt);
    };

    Prediction p{};
    p.phi_dyn = -loop_integral([](const geometry::FrameField& f) { return f.b_z; });
    p.phi_bp = -loop_integral([](const geometry::FrameField& f) { return f.omega_z; });
    p.phi_na2 = -c.gamma2 * loop_integral([](const geometry::FrameField& f) {
        const double wx = f.omega_x + f.b_x, wy = f.omega_y + f.b_y;
        return (wx * wx + wy * wy) * (f.omega_z + f.b_z);
    });
    p.phi_total = p.phi_dyn + p.phi_bp + p.phi_na2;

    const double g1s = c.gamma1 * suppress;
    p.d_dyn = g1s * loop_integral([](const geometry::FrameField& f) {
        return f.b_x * f.b_x + f.b_y * f.b_y;
    });
    p.d_bp = g1s * loop_integral([](const geometry::FrameField& f) {
        return 2.0 * (f.b_x * f.omega_x + f.b_y * f.omega_y);
    });
    p.d_na1 = g1s * loop_integral([](const geometry::FrameField& f) {
        return f.omega_perp * f.omega_perp;
    });
    p.d_total = p.d_dyn + p.d_bp + p.d_na1;

    p.residual_bound = c.gamma1 * c.gamma1 * loop_integral([](const geometry::FrameField& f) {
        const double wx = f.omega_x + f.b_x, wy = f.omega_y + f.b_y;
        return std::pow(wx * wx + wy * wy, 1.5);
    });
    return p;
}

RunResult integrate_coherence(const RunConfig& cfg) {
    cfg.validate();
    const auto constants = coupling_constants(cfg.model);

    RateMethod method = cfg.kernel_method;
    if (method == RateMethod::auto_select)
        method = constants.gaussian_kernel_ok ? RateMethod::closed_form : RateMethod::exact_trace;

    RateSource rate;
    rate.constants = &constants;
    rate.method = method;
    std::optional<kernel::TabulatedRate> table;
    if (method == RateMethod::gaussian_quadrature || method == RateMethod::exact_trace) {
        table.emplace(cfg.model, method == RateMethod::exact_trace
                                     ? kernel::KernelMethod::exact_trace
                                     : kernel::KernelMethod::gaussian);
        rate.table = &*table;
    }

    const double tp = cfg.loop.t_p;
    const double tol = cfg.integrator_tolerance;
    cplx s(0.5, 0.0);
    const cplx s0 = s;
    double t = 0.0;
    double phase_acc = 0.0; // unwrapped arg of s/s0
    RunResult out{};

    // keep per-step phase advance well below π so unwrapping is unambiguous
    const auto f0 = geometry::frame_field(cfg.loop, cfg.b_lab, 0.0);
    const double nu0 = std::abs(f0.omega_z + f0.b_z);
    double h = std::min({tp / 64.0, 0.5 / (nu0 + 1e-6 / tp)});
    const double h_min = tp * 1e-14;

    cplx k1 = mu_at(cfg, rate, t) * s;
    if (cfg.store_trace) {
        out.trace.push_back({0.0, s.real(), s.imag(), f0.omega_z, f0.omega_perp});
    }

    while (t < tp) {
        if (t + h > tp) h = tp - t;
        const cplx k2 = mu_at(cfg, rate, t + c2 * h) * (s + h * a21 * k1);
        const cplx k3 = mu_at(cfg, rate, t + c3 * h) * (s + h * (a31 * k1 + a32 * k2));
        const cplx k4 = mu_at(cfg, rate, t + c4 * h) * (s + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const cplx k5 =
            mu_at(cfg, rate, t + c5 * h) * (s + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const cplx k6 = mu_at(cfg, rate, t + h) *
                        (s + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const cplx s_new = s + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const cplx k7 = mu_at(cfg, rate, t + h) * s_new;
        const cplx err_v =
            h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = std::abs(err_v) / (tol * (std::abs(s) + std::abs(s0)));
        const double dphi = std::arg(s_new / s);
        if (err <= 1.0 && std::abs(dphi) < 2.5) {
            t += h;
            s = s_new;
            phase_acc += dphi;
            k1 = k7;
            ++out.steps;
            if (cfg.store_trace) {
                const auto f = geometry::frame_field(cfg.loop, cfg.b_lab, t);
                out.trace.push_back({t, s.real(), s.imag(), f.omega_z, f.omega_perp});
            }
        }
        double scale = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        if (std::abs(dphi) >= 2.5) scale = std::min(scale, 0.3);
        h *= std::clamp(scale, 0.2, 5.0);
        if (h < h_min)
            throw std::runtime_error("integrate_coherence: step size underflow at t = " +
                                     std::to_string(t));
    }

    out.s_plus_final = s;
    out.phi_total = -phase_acc;
    out.d_total = -std::log(std::abs(s / s0));
    out.prediction = predict_closed_form(cfg);
    out.rate_evaluations = rate.evaluations;
    return out;
}

} // namespace berryloop::evolve
