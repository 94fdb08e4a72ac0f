#include "berryloop/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "berryloop/rng.hpp"

namespace berryloop::oracle {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
using cplx = std::complex<double>;
using spinor = std::array<cplx, 2>;

// exp(+i (v·σ)/2) applied to ψ, closed form
spinor rotate(const spinor& psi, const std::array<double, 3>& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n == 0.0) return psi;
    const double c = std::cos(0.5 * n);
    const double s = std::sin(0.5 * n) / n;
    const cplx a(c, s * v[2]);
    const cplx b(s * v[1], s * v[0]);
    // [[c + i s vz, s vy + i s vx], [-s vy + i s vx, c - i s vz]]
    return {a * psi[0] + b * psi[1], -std::conj(b) * psi[0] + std::conj(a) * psi[1]};
}

// spinor of the frame transform: U = [[cos θ/2, sin θ/2 e^{-iφ}], [-sin θ/2 e^{iφ}, cos θ/2]]
std::array<cplx, 4> frame_spinor(double theta, double phi) {
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const cplx em = std::exp(cplx(0.0, -phi)), ep = std::exp(cplx(0.0, phi));
    return {cplx(c, 0.0), s * em, -s * ep, cplx(c, 0.0)};
}

cplx coherence_up_down(const geometry::LoopSpec& loop, double t, const spinor& psi) {
    double theta, phi, dth, dph;
    loop.angles(t, theta, phi, dth, dph);
    const auto u = frame_spinor(theta, phi);
    const cplx up = u[0] * psi[0] + u[1] * psi[1];
    const cplx dn = u[2] * psi[0] + u[3] * psi[1];
    return up * std::conj(dn); // ρ_{↑↓} of the pure state in the rotating basis
}

} // namespace

double NoiseRealization::xi(double t) const {
    double v = 0.0;
    for (const auto& m : modes) v += m.amp * std::cos(m.omega * t + m.phase);
    return v;
}

double NoiseRealization::xi_integral(double a, double b) const {
    double v = 0.0;
    for (const auto& m : modes)
        v += m.amp * (std::sin(m.omega * b + m.phase) - std::sin(m.omega * a + m.phase)) / m.omega;
    return v;
}

NoiseRealization sample_from_strata(const spectral::DiscreteModes& strata, double sum_a2,
                                    std::uint64_t seed) {
    const std::size_t n = strata.omega.size();
    NoiseRealization real;
    real.seed = seed;
    real.modes.resize(n);
    rng::Xoshiro256 gen(seed);
    const double amp_sigma = std::sqrt(sum_a2 / n);
    for (std::size_t j = 0; j < n; ++j) {
        real.modes[j].omega = strata.omega[j];
        real.modes[j].amp = amp_sigma * gen.normal();
        real.modes[j].phase = kTwoPi * gen.uniform();
    }
    return real;
}

NoiseRealization sample_realization(const spectral::SpectralModel& model, int n_modes,
                                    std::uint64_t seed) {
    model.validate();
    if (model.regime != spectral::Regime::classical)
        throw std::invalid_argument("sample_realization: model must be in the classical regime");
    if (n_modes < 1) throw std::invalid_argument("sample_realization: n_modes must be >= 1");

    const auto strata = spectral::discretize(model, n_modes);
    double total_weight = 0.0;
    for (double w : strata.weight) total_weight += w;
    // Σ⟨A_j²⟩ = calibration · G Ω_m²; equal strata share it evenly
    const double sum_a2 =
        kNoisePowerCalibration * total_weight * model.omega_m * model.omega_m;
    return sample_from_strata(strata, sum_a2, seed);
}

RealizationResult integrate_realization(const NoiseRealization& real,
                                        const geometry::LoopSpec& loop,
                                        const std::array<double, 3>& b_lab, double dt_max,
                                        int n_checkpoints, Readout readout) {
    loop.validate();
    if (n_checkpoints < 1) throw std::invalid_argument("integrate_realization: need checkpoints");
    const double tp = loop.t_p;
    if (!(dt_max > 0.0)) throw std::invalid_argument("integrate_realization: dt_max must be > 0");

    // start along x' of the t=0 frame: ψ = U(0)† (1,1)/√2
    double th0, ph0, d1, d2;
    loop.angles(0.0, th0, ph0, d1, d2);
    const auto u0 = frame_spinor(th0, ph0);
    const cplx inv = 1.0 / std::sqrt(2.0);
    spinor psi{std::conj(u0[0]) * inv + std::conj(u0[2]) * inv,
               std::conj(u0[1]) * inv + std::conj(u0[3]) * inv};

    RealizationResult out;
    out.checkpoints.resize(n_checkpoints + 1);
    out.norm_drift = 0.0;

    double theta_phase = 0.0; // ∫ ξ dt, accumulated in closed form
    auto record = [&](int k, double t) {
        cplx s = coherence_up_down(loop, t, psi);
        if (readout == Readout::dressed) s *= std::exp(cplx(0.0, -theta_phase));
        out.checkpoints[k] = s;
    };
    record(0, 0.0);

    // per-mode phasors z_j = e^{i(Ω_j t + φ_j)} advanced incrementally;
    // ∫ξ over a step is Σ (a_j/Ω_j) ΔIm z_j, exact for each mode
    const std::size_t nm = real.modes.size();
    std::vector<cplx> z(nm), step_phasor(nm);
    std::vector<double> inv_omega(nm), amp(nm);

    const double t_ck = tp / n_checkpoints;
    for (int k = 0; k < n_checkpoints; ++k) {
        const double t0 = k * t_ck;
        const double t1 = (k + 1) * t_ck;
        const int nsub = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt_max)));
        const double dt = (t1 - t0) / nsub;
        for (std::size_t j = 0; j < nm; ++j) {
            z[j] = std::exp(cplx(0.0, real.modes[j].omega * t0 + real.modes[j].phase));
            step_phasor[j] = std::exp(cplx(0.0, real.modes[j].omega * dt));
            inv_omega[j] = 1.0 / real.modes[j].omega;
            amp[j] = real.modes[j].amp;
        }
        for (int i = 0; i < nsub; ++i) {
            const double ta = t0 + i * dt;
            const double tm = ta + 0.5 * dt;
            const auto e = geometry::axis(loop, tm);
            double xi_int = 0.0;
            for (std::size_t j = 0; j < nm; ++j) {
                const cplx znext = z[j] * step_phasor[j];
                xi_int += amp[j] * inv_omega[j] * (znext.imag() - z[j].imag());
                z[j] = znext;
            }
            // H = -½[ξ(t) e·σ + B·σ]; step rotation exp(+i(σ·v)/2)
            const std::array<double, 3> v{e[0] * xi_int + b_lab[0] * dt,
                                          e[1] * xi_int + b_lab[1] * dt,
                                          e[2] * xi_int + b_lab[2] * dt};
            psi = rotate(psi, v);
            theta_phase += xi_int;
        }
        const double norm = std::sqrt(std::norm(psi[0]) + std::norm(psi[1]));
        out.norm_drift = std::max(out.norm_drift, std::abs(norm - 1.0));
        record(k + 1, t1);
    }
    if (out.norm_drift > 1e-8)
        throw std::runtime_error("integrate_realization: norm drift above 1e-8");
    out.s_plus = out.checkpoints.back();
    return out;
}

EnsembleEstimate ensemble_average(const EnsembleConfig& cfg) {
    cfg.model.validate();
    cfg.loop.validate();
    if (cfg.model.regime != spectral::Regime::classical)
        throw std::invalid_argument("ensemble_average: model must be in the classical regime");
    if (cfg.n_realizations < 1)
        throw std::invalid_argument("ensemble_average: need at least one realization");

    // step bound from the fastest mode and the typical noise amplitude
    const auto strata = spectral::discretize(cfg.model, cfg.n_modes);
    double omega_max = 0.0, total_weight = 0.0;
    for (std::size_t j = 0; j < strata.omega.size(); ++j) {
        omega_max = std::max(omega_max, strata.omega[j]);
        total_weight += strata.weight[j];
    }
    const double sum_a2 =
        kNoisePowerCalibration * total_weight * cfg.model.omega_m * cfg.model.omega_m;
    const double xi_typ = 3.0 * std::sqrt(0.5 * sum_a2);
    const double b_norm = std::sqrt(cfg.b_lab[0] * cfg.b_lab[0] + cfg.b_lab[1] * cfg.b_lab[1] +
                                    cfg.b_lab[2] * cfg.b_lab[2]);
    double dt = 0.05 / std::max({omega_max, xi_typ, b_norm, 1.0 / cfg.loop.t_p});
    if (cfg.dt_max > 0.0) dt = std::min(dt, cfg.dt_max);

    const int m = cfg.n_realizations;
    const int nck = cfg.n_checkpoints;
    std::vector<RealizationResult> results(m);

    std::atomic<bool> failed{false};
    auto run_one = [&](int r) {
        try {
            const auto real = sample_from_strata(
                strata, sum_a2, rng::stream_seed(cfg.base_seed, static_cast<std::uint64_t>(r)));
            results[r] = integrate_realization(real, cfg.loop, cfg.b_lab, dt, nck, cfg.readout);
        } catch (...) {
            failed = true;
        }
    };

    if (cfg.parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (int r = 0; r < m; ++r) run_one(r);
    } else {
        for (int r = 0; r < m; ++r) run_one(r);
    }
    if (failed) throw std::runtime_error("ensemble_average: a realization failed to integrate");

    // reduction in fixed realization order: results identical for any thread count
    EnsembleEstimate est{};
    est.n_realizations = m;
    est.n_modes = cfg.n_modes;
    est.dt_used = dt;
    est.mean_checkpoints.assign(nck + 1, cplx(0.0, 0.0));
    for (int r = 0; r < m; ++r) {
        est.max_norm_drift = std::max(est.max_norm_drift, results[r].norm_drift);
        for (int k = 0; k <= nck; ++k) est.mean_checkpoints[k] += results[r].checkpoints[k];
    }
    for (auto& v : est.mean_checkpoints) v /= static_cast<double>(m);
    est.mean_s_plus = est.mean_checkpoints.back();

    // unwrap the mean-coherence phase along the checkpoints
    double phase = 0.0;
    for (int k = 1; k <= nck; ++k) {
        const cplx ratio = est.mean_checkpoints[k] / est.mean_checkpoints[k - 1];
        phase += std::arg(ratio);
    }
    est.phi_mc = -phase;
    est.d_mc = -std::log(std::abs(est.mean_s_plus) / std::abs(est.mean_checkpoints.front()));

    // bootstrap over realizations
    rng::Xoshiro256 boot(rng::stream_seed(cfg.base_seed ^ 0xb005ull, 0));
    const int nb = std::max(2, cfg.bootstrap_resamples);
    double sphi = 0.0, sphi2 = 0.0, sd = 0.0, sd2 = 0.0;
    for (int bi = 0; bi < nb; ++bi) {
        cplx acc(0.0, 0.0);
        for (int i = 0; i < m; ++i) {
            const int idx = static_cast<int>(boot.next_u64() % static_cast<std::uint64_t>(m));
            acc += results[idx].s_plus;
        }
        acc /= static_cast<double>(m);
        // phase relative to the full-sample mean to stay on one branch
        const double dphi = std::arg(acc / est.mean_s_plus);
        const double phi_b = est.phi_mc - dphi;
        const double d_b = -std::log(std::abs(acc) / std::abs(est.mean_checkpoints.front()));
        sphi += phi_b;
        sphi2 += phi_b * phi_b;
        sd += d_b;
        sd2 += d_b * d_b;
    }
    const double inv = 1.0 / nb;
    est.stderr_phi = std::sqrt(std::max(0.0, sphi2 * inv - (sphi * inv) * (sphi * inv)));
    est.stderr_d = std::sqrt(std::max(0.0, sd2 * inv - (sd * inv) * (sd * inv)));
    if (cfg.keep_realizations) {
        est.realization_s_plus.reserve(m);
        for (int r = 0; r < m; ++r) est.realization_s_plus.push_back(results[r].s_plus);
    }
    return est;
}

} // namespace berryloop::oracle
