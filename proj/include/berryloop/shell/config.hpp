// config.hpp — Run configuration: flat [section] key=value files, overrides, hashing

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "berryloop/evolve.hpp"
#include "berryloop/geometry.hpp"
#include "berryloop/oracle.hpp"
#include "berryloop/spectral.hpp"

namespace berryloop::shell {

// Raw parsed file: section -> key -> literal string. Unknown keys are a hard
// error at bind time; there are no silent defaults for misspellings.
struct RawConfig {
    std::map<std::string, std::map<std::string, std::string>> tables;

    static RawConfig parse_file(const std::string& path);
    static RawConfig parse_text(const std::string& text);
    void apply_override(const std::string& dotted_key, const std::string& value);
    std::string canonical() const; // sorted, normalized; hashing input
};

struct SweepPlan {
    double tp_min{100.0}, tp_max{1000.0};
    int tp_count{8};
    std::string method{"redfield"}; // redfield | closed_form | oracle
};

struct CompareTolerances {
    double phi_abs{1e-3};
    double d_rel{0.05};
    double mc_phi_sigmas{3.0};
    double mc_d_sigmas{3.0};
};

struct Config {
    spectral::SpectralModel model;
    geometry::LoopSpec loop;
    std::array<double, 3> b_lab{0.0, 0.0, 0.0};
    evolve::RateMethod kernel_method{evolve::RateMethod::closed_form};
    double integrator_tolerance{1e-10};
    bool trace{false};
    oracle::EnsembleConfig oracle_cfg; // model/loop/b_lab filled on bind
    SweepPlan sweep;
    CompareTolerances compare;
    std::string config_hash; // canonical FNV-1a64 of the raw config
    bool force{false};

    evolve::RunConfig run_config() const;
};

Config bind_config(const RawConfig& raw);

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t value);

} // namespace berryloop::shell
