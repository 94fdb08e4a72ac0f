#include "berryloop/decompose.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace berryloop::decompose {

namespace {

constexpr std::array<int, 4> kExponents{+1, 0, -1, -2};

// symmetric 4x4 eigenvalues by cyclic Jacobi, for the condition number
std::array<double, 4> sym_eigenvalues(std::array<std::array<double, 4>, 4> a) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 4; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    return {a[0][0], a[1][1], a[2][2], a[3][3]};
}

} // namespace

ScalingFit fit_scaling(const std::vector<Sample>& values) {
    const std::size_t n = values.size();
    if (n < 4)
        throw std::invalid_argument("fit_scaling: underdetermined — need at least 4 points");

    // column-scaled design matrix
    std::array<double, 4> scale{};
    std::vector<std::array<double, 4>> design(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(values[i].t_p > 0.0)) throw std::invalid_argument("fit_scaling: t_p must be > 0");
        for (int c = 0; c < 4; ++c) {
            design[i][c] = std::pow(values[i].t_p, kExponents[c]);
            scale[c] += design[i][c] * design[i][c];
        }
    }
    for (auto& s : scale) s = std::sqrt(s);
    for (auto& row : design)
        for (int c = 0; c < 4; ++c) row[c] /= scale[c];

    // normal equations in long double
    std::array<std::array<long double, 4>, 4> ata{};
    std::array<long double, 4> atb{};
    for (std::size_t i = 0; i < n; ++i)
        for (int r = 0; r < 4; ++r) {
            atb[r] += static_cast<long double>(design[i][r]) * values[i].y;
            for (int c = 0; c < 4; ++c)
                ata[r][c] += static_cast<long double>(design[i][r]) * design[i][c];
        }

    // Cholesky of the scaled normal matrix, then solve and invert
    std::array<std::array<long double, 4>, 4> l{};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c <= r; ++c) {
            long double sum = ata[r][c];
            for (int k = 0; k < c; ++k) sum -= l[r][k] * l[c][k];
            if (r == c) {
                if (sum <= 0.0L)
                    throw std::runtime_error("fit_scaling: singular design matrix");
                l[r][r] = std::sqrt(sum);
            } else {
                l[r][c] = sum / l[c][c];
            }
        }
    }
    auto solve = [&](std::array<long double, 4> rhs) {
        std::array<long double, 4> z{};
        for (int r = 0; r < 4; ++r) {
            long double sum = rhs[r];
            for (int k = 0; k < r; ++k) sum -= l[r][k] * z[k];
            z[r] = sum / l[r][r];
        }
        std::array<long double, 4> x{};
        for (int r = 3; r >= 0; --r) {
            long double sum = z[r];
            for (int k = r + 1; k < 4; ++k) sum -= l[k][r] * x[k];
            x[r] = sum / l[r][r];
        }
        return x;
    };
    const auto beta = solve(atb);

    ScalingFit fit;
    fit.dof = static_cast<int>(n) - 4;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        long double pred = 0.0L;
        for (int c = 0; c < 4; ++c) pred += design[i][c] * beta[c];
        const double r = values[i].y - static_cast<double>(pred);
        rss += r * r;
        fit.tp_grid.push_back(values[i].t_p);
    }
    fit.residual_rms = std::sqrt(rss / n);
    const double sigma2 = fit.dof > 0 ? rss / fit.dof : 0.0;

    // covariance diag of the scaled system: σ² (AᵀA)⁻¹
    for (int c = 0; c < 4; ++c) {
        std::array<long double, 4> e{};
        e[c] = 1.0L;
        const auto col = solve(e);
        const double var = sigma2 * static_cast<double>(col[c]);
        fit.coefficients[kExponents[c]] = static_cast<double>(beta[c]) / scale[c];
        fit.stderrs[kExponents[c]] = std::sqrt(std::max(0.0, var)) / scale[c];
    }

    std::array<std::array<double, 4>, 4> atad{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) atad[r][c] = static_cast<double>(ata[r][c]);
    const auto ev = sym_eigenvalues(atad);
    double lo = ev[0], hi = ev[0];
    for (double v : ev) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    fit.condition_number = (lo > 0.0) ? std::sqrt(hi / lo) : std::numeric_limits<double>::infinity();
    return fit;
}

double loglog_exponent(const std::vector<Sample>& values, double offset) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& v : values) {
        const double mag = std::abs(v.y - offset);
        if (!(mag > 0.0)) continue;
        const double x = std::log(v.t_p), y = std::log(mag);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("loglog_exponent: need >= 2 usable points");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

PhaseDecomposition decompose_phases(const ScalingFit& phi_fit, const ScalingFit& d_fit,
                                    bool b_field_present, double zero_floor) {
    PhaseDecomposition d{};
    d.phi_dyn_density = phi_fit.coefficients.at(+1);
    d.phi_bp = phi_fit.coefficients.at(0);
    d.phi_na1 = phi_fit.coefficients.at(-1);
    d.phi_na2 = phi_fit.coefficients.at(-2);
    d.d_dyn_density = d_fit.coefficients.at(+1);
    d.d_bp = d_fit.coefficients.at(0);
    d.d_na1 = d_fit.coefficients.at(-1);
    d.b_field_present = b_field_present;
    if (!b_field_present) {
        // 2·SE covers sampling noise; the 3√dof term bounds the leak of the
        // beyond-basis systematic residual through the design pseudoinverse
        auto check = [&](const std::string& name, double value, double se, int dof) {
            const double lever = se * std::max(2.0, 3.0 * std::sqrt(static_cast<double>(dof)));
            const double tol = std::max(lever, zero_floor);
            d.checks.push_back({name, value, tol, std::abs(value) <= tol});
        };
        check("phi_dyn_density == 0", d.phi_dyn_density, phi_fit.stderrs.at(+1), phi_fit.dof);
        check("phi_na1 == 0", d.phi_na1, phi_fit.stderrs.at(-1), phi_fit.dof);
        check("d_dyn_density == 0", d.d_dyn_density, d_fit.stderrs.at(+1), d_fit.dof);
        check("d_bp == 0", d.d_bp, d_fit.stderrs.at(0), d_fit.dof);
    }
    return d;
}

} // namespace berryloop::decompose
