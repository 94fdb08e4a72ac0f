#include "berryloop/shell/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "berryloop/decompose.hpp"
#include "berryloop/evolve.hpp"
#include "berryloop/kernel.hpp"
#include "berryloop/oracle.hpp"
#include "berryloop/shell/config.hpp"

namespace berryloop::shell {

namespace {

using nlohmann::json;

struct CliArgs {
    std::string subcommand;
    std::string config_path;
    std::string out_path;
    std::string in_path;
    std::string trace_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    bool force{false};
    bool no_timestamp{false};
    double tau_max{-1.0};
    int tau_count{256};
};

CliArgs parse_cli(const std::vector<std::string>& argv) {
    CliArgs args;
    if (argv.empty()) throw std::runtime_error("missing subcommand");
    args.subcommand = argv[0];
    for (std::size_t i = 1; i < argv.size(); ++i) {
        const std::string& a = argv[i];
        auto need_value = [&](const std::string& flag) -> std::string {
            if (i + 1 >= argv.size()) throw std::runtime_error("flag " + flag + " needs a value");
            return argv[++i];
        };
        if (a == "--set") {
            const std::string kv = need_value(a);
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw std::runtime_error("--set expects section.key=value");
            args.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        } else if (a == "--out") {
            args.out_path = need_value(a);
        } else if (a == "--in") {
            args.in_path = need_value(a);
        } else if (a == "--trace") {
            args.trace_path = need_value(a);
        } else if (a == "--force") {
            args.force = true;
        } else if (a == "--no-timestamp") {
            args.no_timestamp = true;
        } else if (a == "--tau-max") {
            args.tau_max = std::stod(need_value(a));
        } else if (a == "--tau-count") {
            args.tau_count = std::stoi(need_value(a));
        } else if (!a.empty() && a[0] == '-') {
            throw std::runtime_error("unknown flag '" + a + "'");
        } else if (args.config_path.empty()) {
            args.config_path = a;
        } else {
            throw std::runtime_error("unexpected argument '" + a + "'");
        }
    }
    return args;
}

Config load_config(const CliArgs& args) {
    RawConfig raw = args.config_path.empty() ? RawConfig{} : RawConfig::parse_file(args.config_path);
    for (const auto& [k, v] : args.overrides) raw.apply_override(k, v);
    Config cfg = bind_config(raw);
    cfg.force = args.force;
    return cfg;
}

std::string out_dir() {
    if (const char* env = std::getenv("BERRYLOOP_OUTDIR")) return env;
    return ".";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void emit(const CliArgs& args, const json& payload, const std::string& default_name) {
    const std::string text = payload.dump(2) + "\n";
    if (args.out_path == "-") {
        std::cout << text;
    } else {
        const std::string path =
            args.out_path.empty() ? out_dir() + "/" + default_name : args.out_path;
        write_text(path, text);
        std::cout << path << "\n";
    }
}

json timestamp_field(const CliArgs& args) {
    if (args.no_timestamp) return nullptr;
    return static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
}

json constants_json(const spectral::CouplingConstants& c) {
    json j;
    j["g_dis"] = c.g_dis;
    for (const auto& [n, v] : c.chi) j["chi"][std::to_string(n)] = v;
    j["franck_condon_f"] = c.franck_condon_f;
    j["gamma1"] = c.gamma1;
    j["gamma2"] = c.gamma2;
    j["omega_m"] = c.omega_m;
    j["regime"] = (c.regime == spectral::Regime::classical) ? "classical" : "quantum";
    j["validity"] = {{"gaussian_kernel_ok", c.gaussian_kernel_ok},
                     {"exponential_dephasing_suppression_ok",
                      c.exponential_dephasing_suppression_ok},
                     {"franck_condon_large", c.franck_condon_large},
                     {"weak_coupling", c.weak_coupling}};
    return j;
}

// validity banner; returns 2 when flags fail and --force was not given
int validity_status(const Config& cfg, const spectral::CouplingConstants& c) {
    std::vector<std::string> warnings;
    if (!c.gaussian_kernel_ok) warnings.push_back("gaussian_kernel_ok");
    if (!c.franck_condon_large) warnings.push_back("franck_condon_large");
    if (c.weak_coupling) warnings.push_back("weak_coupling");
    if (warnings.empty()) return 0;
    std::cerr << "WARNING: validity flags failed:";
    for (const auto& w : warnings) std::cerr << ' ' << w;
    std::cerr << (cfg.force ? " (--force: continuing)\n" : "\n");
    return cfg.force ? 0 : 2;
}

json run_record(const Config& cfg, double tp, double phi, double d, const std::string& method,
                std::uint64_t seed) {
    json j;
    j["t_p"] = tp;
    j["phi_total"] = phi;
    j["d_total"] = d;
    j["config_hash"] = cfg.config_hash;
    j["seed"] = seed;
    j["method"] = method;
    return j;
}

int cmd_constants(const CliArgs& args) {
    const Config cfg = load_config(args);
    const auto c = coupling_constants(cfg.model);
    json j = constants_json(c);
    j["config_hash"] = cfg.config_hash;
    j["timestamp"] = timestamp_field(args);
    emit(args, j, "constants_" + cfg.config_hash + ".json");
    return validity_status(cfg, c);
}

int cmd_kernel(const CliArgs& args) {
    const Config cfg = load_config(args);
    const auto c = coupling_constants(cfg.model);
    const double om = cfg.model.omega_m;
    const double tmax =
        args.tau_max > 0.0
            ? args.tau_max
            : 6.0 / (om * std::sqrt(std::max(0.5 * c.g_dis, 0.25)));
    std::ostringstream csv;
    csv << "tau,a_even_sym,a_even_asym,a_odd_sym,a_odd_asym,method\n";
    csv.precision(17);
    for (int i = 0; i < args.tau_count; ++i) {
        const double tau = tmax * i / (args.tau_count - 1);
        const auto g = kernel::kernel_gaussian(c, tau);
        csv << tau << ',' << g.a_even_sym << ',' << g.a_even_asym << ',' << g.a_odd_sym << ','
            << g.a_odd_asym << ",gaussian\n";
        const auto e = kernel::kernel_exact(cfg.model, tau);
        csv << tau << ',' << e.a_even_sym << ',' << e.a_even_asym << ',' << e.a_odd_sym << ','
            << e.a_odd_asym << ",exact_trace\n";
    }
    const std::string path = args.out_path.empty()
                                 ? out_dir() + "/kernel_" + cfg.config_hash + ".csv"
                                 : args.out_path;
    if (path == "-")
        std::cout << csv.str();
    else {
        write_text(path, csv.str());
        std::cout << path << "\n";
    }
    return validity_status(cfg, c);
}

json evolve_json(const evolve::RunResult& r) {
    json j;
    j["phi_total"] = r.phi_total;
    j["d_total"] = r.d_total;
    j["s_plus_final"] = {r.s_plus_final.real(), r.s_plus_final.imag()};
    j["prediction_phi"] = r.prediction.phi_total;
    j["prediction_d"] = r.prediction.d_total;
    j["prediction"] = {{"phi_dyn", r.prediction.phi_dyn},
                       {"phi_bp", r.prediction.phi_bp},
                       {"phi_na2", r.prediction.phi_na2},
                       {"d_dyn", r.prediction.d_dyn},
                       {"d_bp", r.prediction.d_bp},
                       {"d_na1", r.prediction.d_na1},
                       {"residual_bound", r.prediction.residual_bound}};
    j["steps"] = r.steps;
    j["rate_evaluations"] = r.rate_evaluations;
    return j;
}

int cmd_evolve(const CliArgs& args) {
    Config cfg = load_config(args);
    if (!args.trace_path.empty()) cfg.trace = true;
    const auto c = coupling_constants(cfg.model);
    const auto r = evolve::integrate_coherence(cfg.run_config());
    json j = evolve_json(r);
    j["config_hash"] = cfg.config_hash;
    j["timestamp"] = timestamp_field(args);
    emit(args, j, "evolve_" + cfg.config_hash + ".json");
    if (!args.trace_path.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "t,re_s,im_s,omega_z,omega_perp\n";
        for (const auto& row : r.trace)
            csv << row.t << ',' << row.re_s << ',' << row.im_s << ',' << row.omega_z << ','
                << row.omega_perp << '\n';
        write_text(args.trace_path, csv.str());
    }
    return validity_status(cfg, c);
}

json oracle_json(const oracle::EnsembleEstimate& est) {
    json j;
    j["mean_s_plus"] = {est.mean_s_plus.real(), est.mean_s_plus.imag()};
    j["phi_mc"] = est.phi_mc;
    j["d_mc"] = est.d_mc;
    j["stderr_phi"] = est.stderr_phi;
    j["stderr_d"] = est.stderr_d;
    j["n_realizations"] = est.n_realizations;
    j["n_modes"] = est.n_modes;
    j["dt_used"] = est.dt_used;
    j["max_norm_drift"] = est.max_norm_drift;
    return j;
}

int cmd_oracle(const CliArgs& args) {
    const Config cfg = load_config(args);
    if (cfg.model.regime != spectral::Regime::classical)
        throw std::runtime_error("oracle: model must be classical (regime = \"classical\")");
    auto ocfg = cfg.oracle_cfg;
    ocfg.keep_realizations = !args.trace_path.empty();
    const auto est = oracle::ensemble_average(ocfg);
    json j = oracle_json(est);
    j["base_seed"] = cfg.oracle_cfg.base_seed;
    j["config_hash"] = cfg.config_hash;
    j["timestamp"] = timestamp_field(args);
    emit(args, j, "oracle_" + cfg.config_hash + ".json");
    if (!args.trace_path.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "realization,re_s_plus,im_s_plus\n";
        for (std::size_t r = 0; r < est.realization_s_plus.size(); ++r)
            csv << r << ',' << est.realization_s_plus[r].real() << ','
                << est.realization_s_plus[r].imag() << '\n';
        write_text(args.trace_path, csv.str());
    }
    return 0;
}

int cmd_sweep(const CliArgs& args) {
    const Config cfg = load_config(args);
    const auto c = coupling_constants(cfg.model);
    const int status = validity_status(cfg, c);
    const int n = cfg.sweep.tp_count;
    if (n < 2) throw std::runtime_error("sweep: tp_count must be >= 2");
    std::vector<double> tps(n);
    for (int i = 0; i < n; ++i)
        tps[i] = cfg.sweep.tp_min *
                 std::pow(cfg.sweep.tp_max / cfg.sweep.tp_min, static_cast<double>(i) / (n - 1));

    std::vector<json> records(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.sweep.method != "oracle")
#endif
    for (int i = 0; i < n; ++i) {
        Config local = cfg;
        local.loop.t_p = tps[i];
        if (cfg.sweep.method == "redfield") {
            const auto r = evolve::integrate_coherence(local.run_config());
            records[i] = run_record(cfg, tps[i], r.phi_total, r.d_total, "redfield", 0);
        } else if (cfg.sweep.method == "closed_form") {
            const auto p = evolve::predict_closed_form(local.run_config());
            records[i] = run_record(cfg, tps[i], p.phi_total, p.d_total, "closed_form", 0);
        } else {
            auto ocfg = local.oracle_cfg;
            ocfg.loop = local.loop;
            const auto est = oracle::ensemble_average(ocfg);
            records[i] =
                run_record(cfg, tps[i], est.phi_mc, est.d_mc, "oracle", ocfg.base_seed);
            records[i]["stderr_phi"] = est.stderr_phi;
            records[i]["stderr_d"] = est.stderr_d;
        }
    }
    std::ostringstream out;
    for (const auto& r : records) out << r.dump() << "\n";
    const std::string path = args.out_path.empty()
                                 ? out_dir() + "/sweep_" + cfg.config_hash + ".jsonl"
                                 : args.out_path;
    if (path == "-")
        std::cout << out.str();
    else {
        write_text(path, out.str());
        std::cout << path << "\n";
    }
    return status;
}

int cmd_decompose(const CliArgs& args) {
    if (args.in_path.empty()) throw std::runtime_error("decompose: --in sweep.jsonl required");
    std::ifstream in(args.in_path);
    if (!in) throw std::runtime_error("cannot open " + args.in_path);
    std::vector<decompose::Sample> phi_samples, d_samples;
    std::string line, hash;
    double max_abs_phi = 0.0, max_abs_d = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json r = json::parse(line);
        const std::string h = r.at("config_hash").get<std::string>();
        if (hash.empty())
            hash = h;
        else if (h != hash)
            throw std::runtime_error("decompose: family mismatch — records carry different config hashes");
        const double tp = r.at("t_p").get<double>();
        phi_samples.push_back({tp, r.at("phi_total").get<double>()});
        d_samples.push_back({tp, r.at("d_total").get<double>()});
        max_abs_phi = std::max(max_abs_phi, std::abs(phi_samples.back().y));
        max_abs_d = std::max(max_abs_d, std::abs(d_samples.back().y));
    }
    const auto phi_fit = decompose::fit_scaling(phi_samples);
    const auto d_fit = decompose::fit_scaling(d_samples);
    const double floor = 1e-8 * std::max(max_abs_phi, 1.0);
    const auto dec = decompose::decompose_phases(phi_fit, d_fit, false, floor);

    json j;
    auto fit_json = [](const decompose::ScalingFit& f) {
        json out;
        for (const auto& [e, v] : f.coefficients) {
            out["coefficients"][std::to_string(e)] = v;
            out["stderrs"][std::to_string(e)] = f.stderrs.at(e);
        }
        out["residual_rms"] = f.residual_rms;
        out["condition_number"] = f.condition_number;
        out["dof"] = f.dof;
        return out;
    };
    j["phi_fit"] = fit_json(phi_fit);
    j["d_fit"] = fit_json(d_fit);
    j["labels"] = {{"phi_dyn_density", dec.phi_dyn_density}, {"phi_bp", dec.phi_bp},
                   {"phi_na1", dec.phi_na1},                 {"phi_na2", dec.phi_na2},
                   {"d_dyn_density", dec.d_dyn_density},     {"d_bp", dec.d_bp},
                   {"d_na1", dec.d_na1}};
    for (const auto& ch : dec.checks)
        j["zero_consistency"].push_back(
            {{"name", ch.name}, {"value", ch.value}, {"tolerance", ch.tolerance}, {"pass", ch.pass}});
    j["config_hash"] = hash;
    j["timestamp"] = timestamp_field(args);
    emit(args, j, "decompose_" + hash + ".json");
    return 0;
}

int cmd_compare(const CliArgs& args) {
    const Config cfg = load_config(args);
    const auto c = coupling_constants(cfg.model);
    const int status = validity_status(cfg, c);

    const auto r = evolve::integrate_coherence(cfg.run_config());
    const auto p = r.prediction;
    struct Row {
        std::string name;
        double value, reference, tolerance;
        bool pass;
    };
    std::vector<Row> rows;
    rows.push_back({"phi redfield vs closed_form", r.phi_total, p.phi_total,
                    std::max(cfg.compare.phi_abs,
                             std::max(5.0 * cfg.integrator_tolerance, p.residual_bound)),
                    false});
    rows.push_back({"d redfield vs closed_form", r.d_total, p.d_total,
                    std::max(cfg.compare.d_rel * std::abs(p.d_total), 1e-12), false});

    bool with_oracle = cfg.model.regime == spectral::Regime::classical &&
                       cfg.oracle_cfg.n_realizations >= 100;
    oracle::EnsembleEstimate est{};
    if (with_oracle) {
        est = oracle::ensemble_average(cfg.oracle_cfg);
        rows.push_back({"phi oracle vs closed_form", est.phi_mc, p.phi_total,
                        cfg.compare.mc_phi_sigmas * est.stderr_phi, false});
        rows.push_back({"d oracle vs closed_form", est.d_mc, p.d_total,
                        std::max(cfg.compare.mc_d_sigmas * est.stderr_d,
                                 cfg.compare.d_rel * std::abs(p.d_total)),
                        false});
    }
    bool all_pass = true;
    json table = json::array();
    for (auto& row : rows) {
        row.pass = std::abs(row.value - row.reference) <= row.tolerance;
        all_pass = all_pass && row.pass;
        std::cout << (row.pass ? "PASS  " : "FAIL  ") << row.name << ": " << row.value << " vs "
                  << row.reference << " (tol " << row.tolerance << ")\n";
        table.push_back({{"name", row.name},
                         {"value", row.value},
                         {"reference", row.reference},
                         {"tolerance", row.tolerance},
                         {"pass", row.pass}});
    }
    json j;
    j["rows"] = table;
    j["config_hash"] = cfg.config_hash;
    j["timestamp"] = timestamp_field(args);
    if (with_oracle) j["oracle"] = oracle_json(est);
    emit(args, j, "compare_" + cfg.config_hash + ".json");
    if (!all_pass) return 1;
    return status;
}

} // namespace

int run_command(const std::vector<std::string>& argv) {
    try {
        const CliArgs args = parse_cli(argv);
        if (args.subcommand == "constants") return cmd_constants(args);
        if (args.subcommand == "kernel") return cmd_kernel(args);
        if (args.subcommand == "evolve") return cmd_evolve(args);
        if (args.subcommand == "oracle") return cmd_oracle(args);
        if (args.subcommand == "sweep") return cmd_sweep(args);
        if (args.subcommand == "decompose") return cmd_decompose(args);
        if (args.subcommand == "compare") return cmd_compare(args);
        throw std::runtime_error("unknown subcommand '" + args.subcommand +
                                 "' (expected constants|kernel|evolve|oracle|sweep|decompose|compare)");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace berryloop::shell
