#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlkpz/analysis.hpp"
#include "nlkpz/config.hpp"
#include "nlkpz/report.hpp"

namespace nlkpz {

/// Result of one experiment: the verdict, headline numbers and the CSV
/// tables it produced (file name -> contents).
struct ExperimentOutcome {
    std::string id;
    bool pass = false;
    /// Key numbers in the order they appear on the verdict line.
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> notes;
    std::optional<ConvergenceReport> convergence;
    std::vector<DecayReport> decay;
    std::optional<PropertyReport> properties;
    std::map<std::string, std::string> files;

    double metric(const std::string& name) const;
    /// "VERDICT <id> PASS|FAIL key=value ...".
    std::string verdict_line() const;
};

ExperimentOutcome exp_quadratic_exactness(const ExperimentConfig& cfg);
ExperimentOutcome exp_convergence_dirichlet(const ExperimentConfig& cfg);
ExperimentOutcome exp_convergence_cauchy(const ExperimentConfig& cfg);
/// Comparison pairs, ordered constants and maximum-principle runs.
ExperimentOutcome exp_comparison(const ExperimentConfig& cfg);
ExperimentOutcome exp_decay_bounded(const ExperimentConfig& cfg);
ExperimentOutcome exp_decay_cauchy(const ExperimentConfig& cfg);
/// Class certification, power inequality, Fourier identity, fault injection
/// and the GNS ratio sweep.
ExperimentOutcome exp_property_suite(const ExperimentConfig& cfg);
ExperimentOutcome exp_picard_crosscheck(const ExperimentConfig& cfg);

/// Dispatch on cfg.id.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

/// Writes the CSV tables, config.json and verdict.txt into dir.
void write_outputs(const ExperimentOutcome& outcome, const ExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace nlkpz
