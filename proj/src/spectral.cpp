#include "berryloop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "berryloop/quadrature.hpp"

namespace berryloop::spectral {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gaussian bumps carry compact support |x-c| <= k·w with k capped so the
// support stays inside x > 0: the model has no low-frequency modes by
// construction (truncated mass <= e^{-72} for narrow bumps).
double gaussian_cut(const SpectralModel& m) { return std::min(12.0, 0.98 * m.center / m.width); }

double base_density(const SpectralModel& m, double x) {
    switch (m.kind) {
        case DensityKind::gaussian_bump: {
            const double z = (x - m.center) / m.width;
            if (std::abs(z) > gaussian_cut(m)) return 0.0;
            return m.weight * std::exp(-0.5 * z * z) / (m.width * std::sqrt(2.0 * kPi));
        }
        case DensityKind::lorentzian_bump: {
            const double d = x - m.center;
            return m.weight * (m.width / kPi) / (d * d + m.width * m.width);
        }
        case DensityKind::tabulated: {
            const auto& xs = m.table_x;
            const auto& js = m.table_j;
            if (x <= xs.front() || x >= xs.back()) {
                // exact endpoints read back their table value
                if (x == xs.front()) return js.front();
                if (x == xs.back()) return js.back();
                return 0.0;
            }
            const auto it = std::upper_bound(xs.begin(), xs.end(), x);
            const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
            const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
            return js[i] + t * (js[i + 1] - js[i]);
        }
    }
    return 0.0;
}

// coth(y/2) with the zero-temperature limit built in
double coth_half(double beta_omega_m, double x) {
    if (std::isinf(beta_omega_m)) return 1.0;
    const double y = 0.5 * beta_omega_m * x;
    if (y > 20.0) return 1.0;
    return 1.0 / std::tanh(y);
}

quad::Options moment_options() { return quad::Options{1e-10, 1e-8, 48}; }

double integrate_density(const SpectralModel& m, const std::function<double(double)>& weight_fn) {
    const auto [lo, hi] = m.support();
    return quad::integrate_semi_infinite<double>(
        [&](double x) { return eval_density(m, x) * weight_fn(x); }, lo, hi, moment_options());
}

void check_moment_integrable(const SpectralModel& m, int n) {
    if (n > 1) return;
    // x^{n-2} with n<=1 diverges at 0 unless j vanishes there
    const auto [lo, hi] = m.support();
    const double probe = eval_density(m, std::min(1e-8, 0.5 * lo) + 1e-12);
    const double peak = eval_density(m, m.kind == DensityKind::tabulated
                                            ? m.table_x[std::max_element(m.table_j.begin(), m.table_j.end()) -
                                                        m.table_j.begin()]
                                            : m.center);
    if (probe > 1e-13 * std::max(peak, 1e-300)) {
        throw std::runtime_error("non-integrable moment: j(0+) > 0 makes the x^" +
                                 std::to_string(n - 2) + " integral divergent (n=" +
                                 std::to_string(n) + ")");
    }
}

} // namespace

void SpectralModel::validate() const {
    if (!(omega_m > 0.0)) throw std::invalid_argument("spectral model: omega_m must be > 0");
    if (regime == Regime::quantum && !(beta_omega_m > 0.0))
        throw std::invalid_argument("spectral model: quantum regime requires beta_omega_m > 0");
    if (kind == DensityKind::tabulated) {
        if (table_x.size() < 2 || table_x.size() != table_j.size())
            throw std::invalid_argument("tabulated density: need >= 2 (x, j) rows");
        for (std::size_t i = 0; i < table_x.size(); ++i) {
            if (table_x[i] < 0.0)
                throw std::invalid_argument("tabulated density: negative abscissa");
            if (i > 0 && !(table_x[i] > table_x[i - 1]))
                throw std::invalid_argument("tabulated density: abscissae must be strictly increasing");
            if (table_j[i] < 0.0)
                throw std::invalid_argument("tabulated density: j(x) must be >= 0");
        }
    } else {
        if (!(width > 0.0) || weight < 0.0 || !(center > 0.0))
            throw std::invalid_argument(
                "spectral model: center and width must be > 0, weight >= 0");
    }
}

std::array<double, 2> SpectralModel::support() const {
    if (kind == DensityKind::tabulated)
        return {std::max(table_x.front(), 1e-12), table_x.back()};
    if (kind == DensityKind::gaussian_bump) {
        const double cut = gaussian_cut(*this) * width;
        return {std::max(center - cut, 1e-12 * center), center + cut};
    }
    return {1e-12 * center, center + 12.0 * width + 1e4 * width};
}

double eval_density(const SpectralModel& model, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("eval_density: x must be finite");
    if (x <= 0.0) return 0.0;
    double j = base_density(model, x);
    if (model.inv_beta_x_scale > 0.0) j /= model.inv_beta_x_scale * x;
    return j;
}

double chi_moment(const SpectralModel& model, int n) {
    if (n < 0 || n > 4) throw std::invalid_argument("chi_moment: n must be in {0..4}");
    model.validate();
    if (model.regime == Regime::classical && (n % 2 == 1)) return 0.0;
    check_moment_integrable(model, n);
    const double g = integrate_density(model, [&](double x) {
        return (model.regime == Regime::classical) ? 1.0 : coth_half(model.beta_omega_m, x);
    });
    if (!(g > 0.0)) throw std::runtime_error("chi_moment: vanishing coupling integral");
    const double num = integrate_density(model, [&](double x) {
        const double bracket = (n % 2 == 1) ? 1.0
                                            : (model.regime == Regime::classical
                                                   ? 1.0
                                                   : coth_half(model.beta_omega_m, x));
        return std::pow(x, n - 2) * bracket;
    });
    return num / g;
}

CouplingConstants coupling_constants(const SpectralModel& model) {
    model.validate();
    CouplingConstants c;
    c.omega_m = model.omega_m;
    c.regime = model.regime;
    c.g_dis = integrate_density(model, [&](double x) {
        return (model.regime == Regime::classical) ? 1.0 : coth_half(model.beta_omega_m, x);
    });
    if (!(c.g_dis > 0.0)) throw std::runtime_error("coupling_constants: G_dis must be > 0");
    for (int n = 0; n <= 4; ++n) c.chi[n] = chi_moment(model, n);
    c.franck_condon_f = c.chi[0] * c.g_dis;
    c.gamma1 = std::sqrt(2.0 * kPi / c.g_dis) / model.omega_m;
    if (model.regime == Regime::quantum) {
        const double denom = 2.0 * model.omega_m * c.g_dis * c.chi[1];
        c.gamma2 = (denom != 0.0) ? 1.0 / (denom * denom)
                                  : std::numeric_limits<double>::infinity();
    } else {
        c.gamma2 = 1.0 / (2.0 * model.omega_m * model.omega_m * c.g_dis * c.g_dis);
    }
    if (model.regime == Regime::quantum)
        c.gaussian_kernel_ok = c.chi[3] <= 0.3 * std::sqrt(c.g_dis);
    else
        c.gaussian_kernel_ok = c.chi[4] <= 0.3 * c.g_dis;
    c.exponential_dephasing_suppression_ok = c.g_dis * c.chi[1] * c.chi[1] >= 20.0;
    c.franck_condon_large = c.franck_condon_f >= 10.0;
    c.weak_coupling = c.g_dis <= 1.0;
    return c;
}

SpectralModel classical_limit(const SpectralModel& model) {
    model.validate();
    if (model.regime != Regime::quantum)
        throw std::invalid_argument("classical_limit: model is already classical");
    if (std::isinf(model.beta_omega_m))
        throw std::invalid_argument("classical_limit: undefined at zero temperature (beta = inf)");
    SpectralModel cl = model;
    cl.regime = Regime::classical;
    cl.inv_beta_x_scale = model.beta_omega_m; // j_cl = j / (βΩ_m x)
    cl.beta_omega_m = 0.0;
    return cl;
}

SpectralModel load_tabulated_csv(const std::string& path, double omega_m, Regime regime) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open density table: " + path);
    SpectralModel m;
    m.kind = DensityKind::tabulated;
    m.omega_m = omega_m;
    m.regime = regime;
    if (regime == Regime::classical) m.beta_omega_m = 0.0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x, j;
        if (!(row >> x >> j)) throw std::runtime_error("density table: bad row '" + line + "'");
        m.table_x.push_back(x);
        m.table_j.push_back(j);
    }
    m.validate();
    return m;
}

DiscreteModes discretize(const SpectralModel& model, int n_modes) {
    model.validate();
    if (n_modes < 1) throw std::invalid_argument("discretize: n_modes must be >= 1");
    const auto [lo, hi] = model.support();
    DiscreteModes out;
    const double total = integrate_density(model, [](double) { return 1.0; });
    if (!(total > 0.0)) {
        out.omega.assign(n_modes, model.center * model.omega_m);
        for (int i = 1; i < n_modes; ++i) out.omega[i] = out.omega[i - 1] * (1.0 + 1e-12);
        out.weight.assign(n_modes, 0.0);
        return out;
    }
    // cumulative weight on a fine grid, then quantile midpoints per stratum
    const int grid = 1 << 14;
    std::vector<double> xs(grid + 1), cum(grid + 1, 0.0);
    for (int i = 0; i <= grid; ++i) xs[i] = lo + (hi - lo) * i / grid;
    for (int i = 1; i <= grid; ++i) {
        const double a = eval_density(model, xs[i - 1]);
        const double b = eval_density(model, xs[i]);
        cum[i] = cum[i - 1] + 0.5 * (a + b) * (xs[i] - xs[i - 1]);
    }
    const double norm = cum.back();
    out.omega.resize(n_modes);
    out.weight.assign(n_modes, total / n_modes);
    for (int k = 0; k < n_modes; ++k) {
        const double target = norm * (k + 0.5) / n_modes;
        const auto it = std::lower_bound(cum.begin(), cum.end(), target);
        std::size_t i = std::max<std::size_t>(1, static_cast<std::size_t>(it - cum.begin()));
        const double t = (target - cum[i - 1]) / std::max(cum[i] - cum[i - 1], 1e-300);
        out.omega[k] = (xs[i - 1] + t * (xs[i] - xs[i - 1])) * model.omega_m;
        if (k > 0 && out.omega[k] <= out.omega[k - 1])
            out.omega[k] = out.omega[k - 1] * (1.0 + 1e-12);
    }
    return out;
}

DiscretizationDiagnostic discretization_diagnostic(const SpectralModel& model, int n_modes) {
    const auto c = coupling_constants(model);
    const auto modes = discretize(model, n_modes);
    // Discrete chain: Σ π K_j^2 (...) = ∫ J dΩ per stratum, J(Ω) = Ω_m j(Ω/Ω_m):
    // K_j^2 = (stratum weight) Ω_m^2 / π.
    double g_disc = 0.0, f_disc = 0.0;
    for (std::size_t j = 0; j < modes.omega.size(); ++j) {
        const double k2 = modes.weight[j] * model.omega_m * model.omega_m / kPi;
        const double x = modes.omega[j] / model.omega_m;
        const double coth = (model.regime == Regime::classical)
                                ? 1.0
                                : coth_half(model.beta_omega_m, x);
        g_disc += k2 * coth / (model.omega_m * model.omega_m);
        f_disc += 0.5 * (k2 / (modes.omega[j] * modes.omega[j])) * coth;
    }
    return {g_disc / c.g_dis, f_disc / c.franck_condon_f};
}

} // namespace berryloop::spectral
