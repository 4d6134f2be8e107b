#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pgdf/config.hpp"

namespace pgdf {

/// Dataset material for one run: possibly-noisy train set, clean test set,
/// the flip mask when ground truth is known, and the resolved nominal noise
/// ratio used by the pipeline.
struct RunData {
    LabeledDataset train;
    LabeledDataset test;
    std::optional<FlipMask> flips;
    double nominal_tau = 0.0;
};

RunData prepare_data(const ExperimentConfig& cfg);

struct ArmOutcome {
    std::string arm;
    std::vector<std::uint64_t> seeds;
    std::vector<double> accuracies;
    double mean = 0.0;
    double stddev = 0.0;
    bool failed = false;
    std::string error;
};

struct AblateReport {
    std::vector<ArmOutcome> arms;
    std::string to_csv() const;
    std::string to_json() const;
    std::string to_table() const;
};

struct SweepRow {
    std::string parameter;
    double value = 0.0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> accuracies;
    double mean = 0.0;
    double stddev = 0.0;
    std::string config_path;
};

// Subcommand entry points; each writes its artifacts into cfg.run_out and
// returns 0 on success. Errors propagate as exceptions.
int run_synth(const ExperimentConfig& cfg);
int run_inject(const ExperimentConfig& cfg);
int run_warmup(const ExperimentConfig& cfg);
int run_prior(const ExperimentConfig& cfg);
int run_train(const ExperimentConfig& cfg, const std::string& arm = "full");
int run_eval(const ExperimentConfig& cfg, const std::string& model_path,
             const std::string& data_csv);
AblateReport run_ablate(const ExperimentConfig& cfg, const std::vector<std::string>& arms,
                        int num_seeds = 3);
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                const std::vector<double>& values, int num_seeds = 3);

/// Applies one ablation arm to a pipeline config. Valid arms: full, no-prior,
/// no-gmm, no-refine, no-enhance, single-network.
void apply_arm(PgdfConfig& config, const std::string& arm);

extern const std::vector<std::string> kAllArms;

} // namespace pgdf
