#include "berryloop/shell/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace berryloop::shell {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

double to_number(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw std::runtime_error("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::runtime_error("config: key '" + key + "' expects true/false, got '" + v + "'");
}

// consumes keys from the table; leftovers are reported as unknown
class TableReader {
public:
    TableReader(const std::string& section, std::map<std::string, std::string> kv)
        : section_(section), kv_(std::move(kv)) {}

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string str(const std::string& key, const std::string& dflt) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return dflt;
        const std::string v = unquote(it->second);
        kv_.erase(it);
        return v;
    }
    double num(const std::string& key, double dflt) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return dflt;
        const double v = to_number(section_ + "." + key, it->second);
        kv_.erase(it);
        return v;
    }
    bool flag(const std::string& key, bool dflt) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return dflt;
        const bool v = to_bool(section_ + "." + key, it->second);
        kv_.erase(it);
        return v;
    }
    void done() const {
        if (!kv_.empty())
            throw std::runtime_error("config: unknown key '" + section_ + "." +
                                     kv_.begin()->first + "'");
    }

private:
    std::string section_;
    std::map<std::string, std::string> kv_;
};

} // namespace

RawConfig RawConfig::parse_text(const std::string& text) {
    RawConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.tables[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected 'key = value' inside a [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key or value");
        cfg.tables[section][key] = value;
    }
    return cfg;
}

RawConfig RawConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

void RawConfig::apply_override(const std::string& dotted_key, const std::string& value) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string::npos)
        throw std::runtime_error("override must be section.key=value, got '" + dotted_key + "'");
    tables[dotted_key.substr(0, dot)][dotted_key.substr(dot + 1)] = value;
}

std::string RawConfig::canonical() const {
    std::ostringstream out;
    for (const auto& [section, kv] : tables)
        for (const auto& [key, value] : kv) out << section << '.' << key << '=' << unquote(value) << '\n';
    return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

Config bind_config(const RawConfig& raw) {
    Config cfg;
    cfg.config_hash = hex64(fnv1a64(raw.canonical()));
    auto tables = raw.tables;

    const std::array<std::string, 7> known{"model", "loop", "field", "evolve",
                                           "oracle", "sweep", "compare"};
    for (const auto& [section, kv] : tables)
        if (std::find(known.begin(), known.end(), section) == known.end())
            throw std::runtime_error("config: unknown section '" + section + "'");

    {
        TableReader t("model", tables.count("model") ? tables.at("model")
                                                     : std::map<std::string, std::string>{});
        const std::string kind = t.str("kind", "gaussian_bump");
        const std::string regime = t.str("regime", "quantum");
        const double omega_m = t.num("omega_m", 1.0);
        if (kind == "tabulated") {
            cfg.model = spectral::load_tabulated_csv(
                t.str("table", ""), omega_m,
                regime == "classical" ? spectral::Regime::classical : spectral::Regime::quantum);
        } else {
            cfg.model.kind = (kind == "gaussian_bump") ? spectral::DensityKind::gaussian_bump
                             : (kind == "lorentzian_bump")
                                 ? spectral::DensityKind::lorentzian_bump
                                 : throw std::runtime_error("config: unknown model.kind '" + kind + "'");
            cfg.model.omega_m = omega_m;
            cfg.model.regime = (regime == "classical") ? spectral::Regime::classical
                               : (regime == "quantum")
                                   ? spectral::Regime::quantum
                                   : throw std::runtime_error("config: unknown model.regime '" +
                                                              regime + "'");
            cfg.model.center = t.num("center", 1.0);
            cfg.model.width = t.num("width", 0.1);
            cfg.model.weight = t.num("weight", 1.0);
        }
        cfg.model.beta_omega_m = (cfg.model.regime == spectral::Regime::classical)
                                     ? 0.0
                                     : t.num("beta_omega_m",
                                             std::numeric_limits<double>::infinity());
        t.done();
        cfg.model.validate();
    }
    {
        TableReader t("loop", tables.count("loop") ? tables.at("loop")
                                                   : std::map<std::string, std::string>{});
        const std::string kind = t.str("kind", "cap");
        const double tp = t.num("t_p", 1.0);
        if (kind == "piecewise_table") {
            cfg.loop = geometry::load_loop_csv(t.str("table", ""), tp);
        } else if (kind == "cap" || kind == "wobble") {
            cfg.loop.kind = (kind == "cap") ? geometry::LoopKind::cap : geometry::LoopKind::wobble;
            cfg.loop.t_p = tp;
            cfg.loop.theta0 = t.num("theta0", 1.0471975511965976);
            cfg.loop.wobble_amplitude = t.num("wobble_amplitude", 0.0);
            cfg.loop.wobble_harmonic = static_cast<int>(t.num("wobble_harmonic", 2));
        } else {
            throw std::runtime_error("config: unknown loop.kind '" + kind + "'");
        }
        cfg.loop.reverse = t.flag("reverse", false);
        t.done();
        cfg.loop.validate();
    }
    {
        TableReader t("field", tables.count("field") ? tables.at("field")
                                                     : std::map<std::string, std::string>{});
        cfg.b_lab = {t.num("bx", 0.0), t.num("by", 0.0), t.num("bz", 0.0)};
        t.done();
    }
    {
        TableReader t("evolve", tables.count("evolve") ? tables.at("evolve")
                                                       : std::map<std::string, std::string>{});
        const std::string method = t.str("kernel_method", "auto");
        if (method == "auto")
            cfg.kernel_method = evolve::RateMethod::auto_select;
        else if (method == "closed_form")
            cfg.kernel_method = evolve::RateMethod::closed_form;
        else if (method == "gaussian_quadrature")
            cfg.kernel_method = evolve::RateMethod::gaussian_quadrature;
        else if (method == "exact_trace")
            cfg.kernel_method = evolve::RateMethod::exact_trace;
        else if (method == "none")
            cfg.kernel_method = evolve::RateMethod::none;
        else
            throw std::runtime_error("config: unknown evolve.kernel_method '" + method + "'");
        cfg.integrator_tolerance = t.num("integrator_tolerance", 1e-10);
        cfg.trace = t.flag("trace", false);
        t.done();
    }
    {
        TableReader t("oracle", tables.count("oracle") ? tables.at("oracle")
                                                       : std::map<std::string, std::string>{});
        cfg.oracle_cfg.n_modes = static_cast<int>(t.num("n_modes", 64));
        cfg.oracle_cfg.n_realizations = static_cast<int>(t.num("n_realizations", 4000));
        cfg.oracle_cfg.base_seed = static_cast<std::uint64_t>(t.num("base_seed", 1));
        cfg.oracle_cfg.dt_max = t.num("dt_max", 0.0);
        cfg.oracle_cfg.n_checkpoints = static_cast<int>(t.num("n_checkpoints", 64));
        cfg.oracle_cfg.bootstrap_resamples = static_cast<int>(t.num("bootstrap_resamples", 256));
        cfg.oracle_cfg.parallel = t.flag("parallel", true);
        const std::string readout = t.str("readout", "dressed");
        if (readout == "dressed")
            cfg.oracle_cfg.readout = oracle::Readout::dressed;
        else if (readout == "bare")
            cfg.oracle_cfg.readout = oracle::Readout::bare;
        else
            throw std::runtime_error("config: unknown oracle.readout '" + readout + "'");
        t.done();
    }
    {
        TableReader t("sweep", tables.count("sweep") ? tables.at("sweep")
                                                     : std::map<std::string, std::string>{});
        cfg.sweep.tp_min = t.num("tp_min", 100.0);
        cfg.sweep.tp_max = t.num("tp_max", 1000.0);
        cfg.sweep.tp_count = static_cast<int>(t.num("tp_count", 8));
        cfg.sweep.method = t.str("method", "redfield");
        t.done();
        if (cfg.sweep.method != "redfield" && cfg.sweep.method != "closed_form" &&
            cfg.sweep.method != "oracle")
            throw std::runtime_error("config: unknown sweep.method '" + cfg.sweep.method + "'");
    }
    {
        TableReader t("compare", tables.count("compare") ? tables.at("compare")
                                                         : std::map<std::string, std::string>{});
        cfg.compare.phi_abs = t.num("tolerance_phi", 1e-3);
        cfg.compare.d_rel = t.num("tolerance_d_rel", 0.05);
        cfg.compare.mc_phi_sigmas = t.num("mc_phi_sigmas", 3.0);
        cfg.compare.mc_d_sigmas = t.num("mc_d_sigmas", 3.0);
        t.done();
    }

    cfg.oracle_cfg.model = cfg.model;
    cfg.oracle_cfg.loop = cfg.loop;
    cfg.oracle_cfg.b_lab = cfg.b_lab;
    return cfg;
}

evolve::RunConfig Config::run_config() const {
    evolve::RunConfig rc;
    rc.model = model;
    rc.loop = loop;
    rc.b_lab = b_lab;
    rc.kernel_method = kernel_method;
    rc.integrator_tolerance = integrator_tolerance;
    rc.store_trace = trace;
    return rc;
}

} // namespace berryloop::shell
