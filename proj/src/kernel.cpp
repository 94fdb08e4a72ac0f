#include "berryloop/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "berryloop/quadrature.hpp"

namespace berryloop::kernel {

namespace {

constexpr double kPi = 3.14159265358979323846;
using cplx = std::complex<double>;

// breakpoints for the oscillatory τ-integrals: panels about one oscillation
// period wide out to where the Gaussian envelope is dead
std::vector<double> tau_panels(double tau_max, double panel) {
    std::vector<double> b{0.0};
    while (b.back() < tau_max) b.push_back(b.back() + panel);
    return b;
}

} // namespace

std::complex<double> f_exact(const spectral::SpectralModel& model, double tau) {
    model.validate();
    const double y = model.omega_m * tau;
    const auto [lo, hi] = model.support();
    const quad::Options opt{1e-12, 1e-9, 52};
    if (model.regime == spectral::Regime::classical) {
        return quad::integrate_semi_infinite<double>(
            [&](double x) { return spectral::eval_density(model, x) * std::cos(y * x) / (x * x); },
            lo, hi, opt);
    }
    const double beta = model.beta_omega_m;
    return quad::integrate_semi_infinite<cplx>(
        [&](double x) -> cplx {
            const double j = spectral::eval_density(model, x);
            if (j == 0.0) return {0.0, 0.0};
            const cplx forward = std::exp(cplx(0.0, -y * x));
            if (std::isinf(beta)) return j * forward / (x * x);
            const double e = std::exp(-beta * x);
            const cplx backward = std::exp(cplx(0.0, y * x)) * e;
            return j * (forward + backward) / ((1.0 - e) * x * x);
        },
        lo, hi, opt);
}

KernelEvaluation kernel_exact_from_f(std::complex<double> f, double big_f, double tau) {
    // e^{-2F} cosh 2f = ½ e^{2(f-F)} + ½ e^{-2(f+F)}; both exponents have
    // non-positive real part since |Re f| <= F
    const cplx main = 0.5 * std::exp(2.0 * (f - big_f));
    const cplx sub = 0.5 * std::exp(-2.0 * (f + big_f));
    const double floor = std::exp(-2.0 * big_f);
    const cplx even = main + sub - floor;
    const cplx odd = main - sub;
    return {tau, even.real(), even.imag(), odd.real(), odd.imag(), KernelMethod::exact_trace};
}

KernelEvaluation kernel_exact(const spectral::SpectralModel& model, double tau) {
    const auto c = coupling_constants(model);
    return kernel_exact_from_f(f_exact(model, tau), c.franck_condon_f, tau);
}

KernelEvaluation kernel_gaussian(const spectral::CouplingConstants& c, double tau) {
    const double y = c.omega_m * tau;
    const cplx expo(-0.5 * c.g_dis * y * y, -c.g_dis * c.chi.at(1) * y);
    const cplx a = 0.5 * std::exp(expo);
    return {tau, a.real(), a.imag(), a.real(), a.imag(), KernelMethod::gaussian};
}

std::complex<double> i_integral_quadrature(const spectral::CouplingConstants& c, double b) {
    if (!(c.g_dis > 0.0)) throw std::invalid_argument("i_integral: G_dis must be > 0");
    const double om = c.omega_m;
    const double a = 0.5 * c.g_dis * om * om;
    const double freq = c.g_dis * (c.chi.at(1) + b) * om;
    // Gaussian-envelope decay plus the oscillation scale; the second term is
    // regularized by the envelope width so chi1 -> 0 stays finite
    const double tau_max =
        8.0 / (om * std::sqrt(0.5 * c.g_dis)) +
        8.0 / (om * (c.g_dis * std::abs(c.chi.at(1)) + std::sqrt(0.5 * c.g_dis)));
    const double panel = kPi / (c.g_dis * om * std::abs(c.chi.at(1)) + om);
    const auto panels = tau_panels(tau_max, panel);
    const quad::Options opt{1e-13, 1e-10, 40};
    const double re = 2.0 * quad::integrate_panels<double>(
        [&](double t) { return std::exp(-a * t * t) * std::cos(freq * t); }, panels, opt);
    const double im = -quad::integrate_panels<double>(
        [&](double t) { return std::exp(-a * t * t) * std::sin(freq * t); }, panels, opt);
    return {re, im};
}

double re_closed_form(const spectral::CouplingConstants& c, double b) {
    const double chib = c.chi.at(1) + b;
    return std::sqrt(kPi) * std::exp(-0.5 * c.g_dis * chib * chib) /
           (c.omega_m * std::sqrt(0.5 * c.g_dis));
}

double im_closed_form(const spectral::CouplingConstants& c, double b) {
    if (c.regime == spectral::Regime::classical)
        return 2.0 * b / (c.omega_m * c.g_dis);
    const double chib = c.chi.at(1) + b;
    if (chib == 0.0)
        throw std::domain_error("im_closed_form: pole at chi1 + b = 0 (quadrature path remains valid)");
    return -1.0 / (c.omega_m * c.g_dis * chib);
}

IbResult i_integral(const spectral::CouplingConstants& c, double b) {
    return {i_integral_quadrature(c, b), re_closed_form(c, b), im_closed_form(c, b)};
}

std::complex<double> complex_rate(const spectral::CouplingConstants& c, double omega_z) {
    const double b = omega_z / (2.0 * c.g_dis * c.omega_m);
    const cplx ip = i_integral_quadrature(c, b);
    const cplx im = i_integral_quadrature(c, -b);
    return 0.25 * (ip + std::conj(im));
}

std::complex<double> coherence_rate(const spectral::CouplingConstants& c, double nu) {
    const double b = nu / (2.0 * c.g_dis * c.omega_m);
    const double re = re_closed_form(c, b) + re_closed_form(c, -b);
    const double im = -0.5 * (im_closed_form(c, b) - im_closed_form(c, -b));
    return {re, im};
}

TabulatedRate::TabulatedRate(const spectral::SpectralModel& model, KernelMethod method) {
    const auto c = coupling_constants(model);
    const double om = c.omega_m;
    const double chi1 = c.chi.at(1);
    const double envelope = std::sqrt(std::max(0.5 * c.g_dis, 0.25));
    double tau_max = 8.0 / (om * envelope) + 8.0 / (om * (c.g_dis * std::abs(chi1) + envelope));
    // broad kernels (small G) persist longer; cap the table at a sane length
    tau_max = std::min(tau_max, 200.0 / om);
    const int n = 4097;
    tau_.resize(n);
    a_sym_.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = tau_max * i / (n - 1);
        tau_[i] = t;
        const auto k = (method == KernelMethod::exact_trace) ? kernel_exact_from_f(f_exact(model, t), c.franck_condon_f, t)
                                                             : kernel_gaussian(c, t);
        a_sym_[i] = k.a_even_sym;
    }
}

std::complex<double> TabulatedRate::operator()(double nu) const {
    // composite Simpson over the fixed grid
    double re = 0.0, im = 0.0;
    const std::size_t n = tau_.size();
    const double h = tau_[1] - tau_[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double arg = 0.5 * nu * tau_[i];
        re += w * a_sym_[i] * std::cos(arg);
        im += w * a_sym_[i] * std::sin(arg);
    }
    re *= h / 3.0;
    im *= h / 3.0;
    return {8.0 * re, 2.0 * im};
}

double mode_overlap(int m, double alpha, int delta_m) {
    if (m < 0) throw std::domain_error("mode_overlap: occupation m must be >= 0");
    switch (delta_m) {
        case 0: return 1.0 - (m + 0.5) * alpha * alpha;
        case -1: return std::sqrt(static_cast<double>(m)) * alpha;
        case +1: return -std::sqrt(static_cast<double>(m + 1)) * alpha;
        default: throw std::invalid_argument("mode_overlap: delta_m must be -1, 0, or +1");
    }
}

} // namespace berryloop::kernel
