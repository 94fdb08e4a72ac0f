#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "berryloop/shell/commands.hpp"
#include "berryloop/shell/config.hpp"

using namespace berryloop;
using shell::RawConfig;

namespace {

const char* kBaseConfig = R"(
[model]
kind = "gaussian_bump"
regime = "classical"
center = 1.0
width = 0.1
weight = 25.0

[loop]
kind = "cap"
theta0 = 1.0471975511965976
t_p = 300.0
)";

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string strip_timestamp(std::string text) {
    return std::regex_replace(text, std::regex("\\s*\"timestamp\": [0-9]+,?\\n"), "\n");
}

struct TempFile {
    std::string path;
    TempFile(const std::string& name, const std::string& content)
        : path("/tmp/berryloop_test_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("config parsing and overrides") {
    auto raw = RawConfig::parse_text(kBaseConfig);
    CHECK(raw.tables.at("model").at("weight") == "25.0");
    raw.apply_override("model.weight", "30");
    const auto cfg = shell::bind_config(raw);
    CHECK(cfg.model.weight == 30.0);
    CHECK(cfg.model.regime == spectral::Regime::classical);
    CHECK(cfg.loop.t_p == 300.0);
}

TEST_CASE("unknown keys are hard errors") {
    auto raw = RawConfig::parse_text(kBaseConfig);
    raw.apply_override("model.wieght", "30"); // typo must not silently default
    CHECK_THROWS_AS(static_cast<void>(shell::bind_config(raw)), std::runtime_error);
    auto raw2 = RawConfig::parse_text(kBaseConfig);
    raw2.apply_override("mdoel.weight", "30");
    CHECK_THROWS_AS(static_cast<void>(shell::bind_config(raw2)), std::runtime_error);
}

TEST_CASE("config hash is canonical") {
    auto a = RawConfig::parse_text(kBaseConfig);
    auto b = RawConfig::parse_text(kBaseConfig);
    b.apply_override("model.weight", "25.0"); // same value, same hash
    CHECK(shell::bind_config(a).config_hash == shell::bind_config(b).config_hash);
    b.apply_override("model.weight", "26.0");
    CHECK(shell::bind_config(a).config_hash != shell::bind_config(b).config_hash);
}

TEST_CASE("constants command emits the classical gamma2") {
    TempFile cfg("constants.toml", kBaseConfig);
    const std::string out = "/tmp/berryloop_test_constants.json";
    const int rc = shell::run_command(
        {"constants", cfg.path, "--out", out, "--no-timestamp", "--force"});
    CHECK(rc == 0);
    const std::string text = slurp(out);
    CHECK(text.find("\"gamma2\": 0.0008") != std::string::npos);
    CHECK(text.find("\"weak_coupling\": false") != std::string::npos);
    std::remove(out.c_str());
}

TEST_CASE("evolve reruns are byte-identical up to the timestamp") {
    TempFile cfg("evolve.toml", kBaseConfig);
    const std::string o1 = "/tmp/berryloop_test_e1.json", o2 = "/tmp/berryloop_test_e2.json";
    CHECK(shell::run_command({"evolve", cfg.path, "--out", o1, "--force"}) == 0);
    CHECK(shell::run_command({"evolve", cfg.path, "--out", o2, "--force"}) == 0);
    CHECK(strip_timestamp(slurp(o1)) == strip_timestamp(slurp(o2)));
    CHECK(slurp(o1).find("phi_total") != std::string::npos);
    std::remove(o1.c_str());
    std::remove(o2.c_str());
}

TEST_CASE("validity warnings surface as exit code 2 without --force") {
    const std::string weak = std::string(kBaseConfig);
    TempFile cfg("weak.toml", weak);
    // G = 0.5: weak-coupling flag fails
    CHECK(shell::run_command({"constants", cfg.path, "--set", "model.weight=0.5", "--out", "-",
                              "--no-timestamp"}) == 2);
    CHECK(shell::run_command({"constants", cfg.path, "--set", "model.weight=0.5", "--out", "-",
                              "--no-timestamp", "--force"}) == 0);
}

TEST_CASE("sweep then decompose round-trips through JSONL") {
    const std::string cfg_text = std::string(kBaseConfig) + R"(
[sweep]
tp_min = 100.0
tp_max = 1000.0
tp_count = 8
method = "redfield"

[evolve]
integrator_tolerance = 1e-11
)";
    TempFile cfg("sweep.toml", cfg_text);
    const std::string jsonl = "/tmp/berryloop_test_sweep.jsonl";
    CHECK(shell::run_command({"sweep", cfg.path, "--out", jsonl, "--force"}) == 0);

    // 8 self-contained records, one hash
    std::ifstream in(jsonl);
    std::string line, first_hash;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(line.find("\"t_p\"") != std::string::npos);
        CHECK(line.find("\"phi_total\"") != std::string::npos);
        const auto pos = line.find("\"config_hash\":\"");
        const std::string hash = line.substr(pos + 15, 16);
        if (first_hash.empty())
            first_hash = hash;
        else
            CHECK(hash == first_hash);
    }
    CHECK(rows == 8);

    const std::string report = "/tmp/berryloop_test_decomp.json";
    CHECK(shell::run_command({"decompose", "--in", jsonl, "--out", report, "--no-timestamp"}) ==
          0);
    const std::string text = slurp(report);
    CHECK(text.find("phi_bp") != std::string::npos);
    CHECK(text.find("zero_consistency") != std::string::npos);
    std::remove(jsonl.c_str());
    std::remove(report.c_str());
}

TEST_CASE("decompose rejects mixed families") {
    const std::string jsonl = "/tmp/berryloop_test_mixed.jsonl";
    {
        std::ofstream out(jsonl);
        out << R"({"t_p":100.0,"phi_total":3.1,"d_total":0.1,"config_hash":"aaaa","seed":0})"
            << "\n";
        out << R"({"t_p":200.0,"phi_total":3.1,"d_total":0.05,"config_hash":"bbbb","seed":0})"
            << "\n";
    }
    CHECK(shell::run_command({"decompose", "--in", jsonl, "--out", "-"}) == 1);
    std::remove(jsonl.c_str());
}

TEST_CASE("kernel dump writes both methods") {
    TempFile cfg("kernel.toml", kBaseConfig);
    const std::string csv = "/tmp/berryloop_test_kernel.csv";
    CHECK(shell::run_command({"kernel", cfg.path, "--out", csv, "--tau-count", "16", "--force"}) ==
          0);
    const std::string text = slurp(csv);
    CHECK(text.find("tau,a_even_sym,a_even_asym,a_odd_sym,a_odd_asym,method") !=
          std::string::npos);
    CHECK(text.find("gaussian") != std::string::npos);
    CHECK(text.find("exact_trace") != std::string::npos);
    std::remove(csv.c_str());
}

TEST_CASE("compare: all three methods agree and exit 0") {
    const std::string cfg_text = std::string(kBaseConfig) + R"(
[oracle]
n_realizations = 400
base_seed = 20260809
)";
    TempFile cfg("compare.toml", cfg_text);
    const std::string out = "/tmp/berryloop_test_compare.json";
    const int rc = shell::run_command({"compare", cfg.path, "--set", "loop.t_p=16", "--set",
                                       "model.width=0.4", "--set", "model.weight=400", "--out",
                                       out, "--no-timestamp"});
    CHECK(rc == 0);
    const std::string text = slurp(out);
    CHECK(text.find("\"pass\": true") != std::string::npos);
    CHECK(text.find("\"pass\": false") == std::string::npos);
    CHECK(text.find("oracle") != std::string::npos);
    std::remove(out.c_str());
}

TEST_CASE("unknown subcommand fails cleanly") {
    CHECK(shell::run_command({"frobnicate"}) == 1);
}
