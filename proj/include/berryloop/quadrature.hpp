// quadrature.hpp — Adaptive Gauss-Kronrod integration (finite and semi-infinite)

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace berryloop::quad {

struct Options {
    double abs_tol{1e-10};
    double rel_tol{1e-8};
    int max_depth{48};
};

struct PanelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Kronrod 15 nodes on [-1,1] (positive half) and weights; Gauss-7 embedded.
inline constexpr double kron_x[8] = {
    0.991455371120812639206854697526, 0.949107912342758524526189684048,
    0.864864423359769072789712788641, 0.741531185599394439863864773281,
    0.586087235467691130294144838259, 0.405845151377397166906606412077,
    0.207784955007898467600689403773, 0.0};
inline constexpr double kron_w[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gauss_w[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T, class F>
void gk15(const F& f, double a, double b, T& kronrod, double& err) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    T resk = kron_w[7] * f(c);
    T resg = gauss_w[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kron_x[i];
        const T fsum = f(c - dx) + f(c + dx);
        resk += kron_w[i] * fsum;
        if (i % 2 == 1) resg += gauss_w[i / 2] * fsum;
    }
    kronrod = resk * h;
    err = std::abs(std::abs(resk - resg)) * std::abs(h);
}

template <class T, class F>
T adaptive(const F& f, double a, double b, const Options& opt, int depth, double scale) {
    T whole;
    double err;
    gk15<T>(f, a, b, whole, err);
    if (err <= opt.abs_tol || err <= opt.rel_tol * (std::abs(whole) + scale)) return whole;
    if (depth >= opt.max_depth)
        throw PanelError("adaptive quadrature: max subdivision depth reached");
    const double m = 0.5 * (a + b);
    const Options half{0.5 * opt.abs_tol, opt.rel_tol, opt.max_depth};
    return adaptive<T>(f, a, m, half, depth + 1, scale) +
           adaptive<T>(f, m, b, half, depth + 1, scale);
}

} // namespace detail

// Integrate f over [a,b]; T is double or std::complex<double>.
template <class T, class F>
T integrate(const F& f, double a, double b, const Options& opt = {}) {
    if (!(b > a)) return T(0);
    return detail::adaptive<T>(f, a, b, opt, 0, 0.0);
}

// Integrate f over [a,b] with interior breakpoints seeding the subdivision.
template <class T, class F>
T integrate_panels(const F& f, const std::vector<double>& breaks, const Options& opt = {}) {
    T total(0);
    const Options per{opt.abs_tol / std::max<std::size_t>(1, breaks.size() - 1), opt.rel_tol,
                      opt.max_depth};
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (breaks[i + 1] > breaks[i]) total += detail::adaptive<T>(f, breaks[i], breaks[i + 1], per, 0, 0.0);
    return total;
}

// ∫_0^∞ f(x) dx via the substitution x = e^u. `support` hints where the
// integrand lives; the u-interval is widened until both tail panels are
// negligible against the accumulated value.
template <class T, class F>
T integrate_semi_infinite(const F& f, double support_lo, double support_hi,
                          const Options& opt = {}) {
    if (!(support_hi > 0.0)) throw std::invalid_argument("semi-infinite quadrature: empty support hint");
    support_lo = std::max(support_lo, support_hi * 1e-14);
    const auto g = [&f](double u) {
        const double x = std::exp(u);
        return f(x) * x;
    };
    double ulo = std::log(support_lo);
    double uhi = std::log(support_hi);
    T total = integrate<T>(g, ulo, uhi, opt);
    // extend tails panel by panel until they stop contributing
    const double step = 2.0;
    for (int side = 0; side < 2; ++side) {
        for (int k = 0; k < 40; ++k) {
            T piece;
            if (side == 0)
                piece = integrate<T>(g, ulo - step, ulo, opt), ulo -= step;
            else
                piece = integrate<T>(g, uhi, uhi + step, opt), uhi += step;
            total += piece;
            if (std::abs(piece) <= 0.25 * (opt.abs_tol + opt.rel_tol * std::abs(total))) break;
        }
    }
    return total;
}

} // namespace berryloop::quad
