#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pgdf/classifier.hpp"
#include "pgdf/dataset.hpp"
#include "pgdf/semisup.hpp"

namespace pgdf {

/// Every experiment knob under namespaced dotted keys. Values load from a
/// flat `key = value` file, then CLI --set overrides apply. Unknown keys are
/// rejected; the resolved config is serialized into each run directory.
struct ExperimentConfig {
    // dataset.*
    std::string dataset_source = "synth"; // synth | csv
    int dataset_classes = 4;
    int dataset_per_class = 500;
    int dataset_test_per_class = 250;
    int dataset_dim = 8;
    double dataset_separation = 3.0;
    std::string dataset_csv;
    std::string dataset_test_csv;

    // noise.*
    std::string noise_kind = "symmetric"; // symmetric | asymmetric
    double noise_ratio = 0.4;
    std::string noise_permutation; // comma-separated class map, asymmetric only
    bool noise_exclude_self = false;
    bool noise_estimate = false;

    // trainer.*
    double trainer_learning_rate = 0.05;
    double trainer_momentum = 0.9;
    double trainer_weight_decay = 5e-4;
    int trainer_batch_size = 64;
    std::string trainer_hidden = "64,64";

    // prior.*
    double prior_tau_e = -1.0;  // < 0: 0.5 * (1 - tau)
    double prior_tau_n1 = -1.0; // < 0: 0.5 * tau
    int prior_history_epochs = 20;
    bool prior_retrain_from_scratch = true;
    int prior_refresh_every = 0;
    int prior_mm_epochs = 50;
    double prior_mm_learning_rate = 0.05;
    double prior_mm_momentum = 0.9;
    std::string prior_mm_channels = "8,16,16";
    int prior_mm_kernel = 3;

    // gmm.*
    int gmm_max_iter = 100;
    double gmm_tol = 1e-6;

    // divide.*
    double divide_m = 0.5;
    int divide_refit_every = 1;
    bool divide_dump = false;

    // refine.*
    int refine_n_aug = 2;
    double refine_jitter = 0.05;
    double refine_temperature = 0.5;
    double refine_ridge_epsilon = 1e-3;

    // semisup.*
    double semisup_alpha = 4.0;
    double semisup_lambda_u = 25.0;
    double semisup_lambda_r = 1.0;
    int semisup_rampup_epochs = 16;
    double semisup_r = 2.0;
    int semisup_epochs = 50;
    int semisup_warm_up = 10;
    double semisup_no_prior_easy_threshold = 0.95;

    // run.*
    std::uint64_t run_seed = 1;
    std::string run_out = "run";
    bool run_parallel = true;

    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static std::vector<std::string> known_keys();

    /// Flat `key = value` listing of every key, sorted.
    std::string serialize() const;

    static ExperimentConfig from_file(const std::string& path);
    void apply_overrides(const std::vector<std::string>& key_value_pairs);

    std::vector<int> hidden_sizes() const;
    TrainConfig trainer_config() const;
    NoiseSpec noise_spec() const;
    /// tau here is the resolved nominal noise ratio.
    PgdfConfig pgdf_config(double tau) const;
};

} // namespace pgdf
