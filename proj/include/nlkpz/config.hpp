#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlkpz/evolution.hpp"
#include "nlkpz/kernel.hpp"

namespace nlkpz {

struct KernelConfig {
    Profile profile = Profile::uniform;
    int dim = 1;
    double radius = 1.0;
};

struct NonlinearityConfig {
    /// "identity" or "kpz".
    std::string kind = "kpz";
    double mu = 1.0;
    /// Optional CSV of (x, mu) samples; replaces the constant when set.
    std::string mu_csv;
};

struct GeometryConfig {
    /// Box bounds per axis.
    std::vector<std::pair<double, double>> box{{-1.0, 1.0}};
    std::optional<double> h;
    int k_pts = 8;
    std::optional<double> half_width;
    double initial_width = 1.0;
    double contamination_tol = 1e-6;
};

/// Gaussian data a exp(-|x|^2 / (2 variance)). Constant-mu convergence runs
/// use the Hopf-Cole solution with these parameters; decay runs and
/// variable-mu runs use the Gaussian itself as initial datum.
struct ReferenceConfig {
    double amplitude = 0.5;
    double variance = 1.0;
};

struct SamplingConfig {
    /// Uniform samples in [0, T] (convergence runs).
    int count = 26;
    /// Geometric samples per decade (decay runs), starting at t_min.
    int per_decade = 20;
    double t_min = 1.0;
    double fit_lo = 100.0;
    double fit_hi = 1000.0;
};

struct RunConfig {
    double mu = 0.0;
    double horizon = 1.0;
};

struct PropertyConfig {
    std::size_t samples = 100000;
    std::size_t fields = 10;
    std::size_t pairs = 20;
};

struct ExperimentConfig {
    std::string id;
    std::uint64_t seed = 1;
    KernelConfig kernel;
    Normalization normalization = Normalization::mass;
    NonlinearityConfig nonlinearity;
    GeometryConfig geometry;
    std::vector<double> epsilons;
    double horizon = 1.0;
    ReferenceConfig reference;
    IntegratorConfig integrator;
    SamplingConfig sampling;
    std::vector<RunConfig> runs;
    PropertyConfig property;
    /// Pass/fail thresholds; the key set is fixed per experiment.
    std::map<std::string, double> gates;
};

/// Identifiers accepted by default_config and run_experiment.
std::vector<std::string> experiment_ids();

/// Built-in scenario for an experiment id. Throws ConfigError for unknown ids.
ExperimentConfig default_config(const std::string& id);

/// JSON text overriding the defaults of its "experiment" id. Unknown keys,
/// wrong types and unknown gate names are ConfigErrors.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The configuration as JSON, every field spelled out.
std::string to_json(const ExperimentConfig& cfg);

/// Reads x,mu samples (header line required) for a 1D coefficient field.
std::vector<std::pair<double, double>> read_mu_csv(const std::filesystem::path& path);

}  // namespace nlkpz
