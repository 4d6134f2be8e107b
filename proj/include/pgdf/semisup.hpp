#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pgdf/classifier.hpp"
#include "pgdf/dataset.hpp"
#include "pgdf/prior.hpp"

namespace pgdf {

struct MixedSet {
    Matrix features;
    Matrix targets;
    std::vector<double> weights; // labeled branch: w of the first constituent
    std::vector<std::pair<int, int>> pair_ids; // indices into the mixing pool
    std::vector<double> lambdas;               // lambda' per pair, in [0.5, 1]
};

struct MixResult {
    MixedSet labeled;   // X'
    MixedSet unlabeled; // U'
};

/// MixMatch interpolation: lambda ~ Beta(alpha, alpha) per pair, lambda' =
/// max(lambda, 1-lambda), partner drawn uniformly from the concatenation of
/// both sets (labeled rows first). The labeled branch keeps the weight of its
/// first constituent. The unlabeled set may be empty; the labeled set may not.
MixResult mix(const Matrix& labeled_x, const Matrix& labeled_t,
              const std::vector<double>& labeled_w, const Matrix& unlabeled_x,
              const Matrix& unlabeled_t, double alpha, Rng& rng);

struct LossBreakdown {
    double loss_x = 0.0;
    double loss_u = 0.0;
    double loss_reg = 0.0;
    double total = 0.0;
    double lambda_u = 0.0;
    double lambda_r = 0.0;
};

/// Mean over X' of cross-entropy to the mixed target, each term scaled by
/// 1/w_i^r. Weights must be in (0,1].
double loss_labeled(const Mlp& model, const Matrix& X, const Matrix& targets,
                    const std::vector<double>& weights, double r);

/// Mean squared L2 distance between mixed targets and softmax outputs; 0 on
/// an empty set.
double loss_unlabeled(const Mlp& model, const Matrix& X, const Matrix& targets);

/// KL-style penalty sum_c pi_c log(pi_c / mean_c) against the batch-mean
/// output over X' + U'.
double loss_reg_term(const Mlp& model, const Matrix& X_union, const std::vector<double>& pi);

double total_loss(double loss_x, double loss_u, double loss_reg, double lambda_u, double lambda_r);

/// One optimization epoch on the combined objective over the mixed sets.
/// Batches walk X' (and U' proportionally) in a seeded shuffle; the reported
/// breakdown averages the pre-update per-step values.
LossBreakdown train_mixed_epoch(Mlp& model, const MixResult& mixed, double r, double lambda_u,
                                double lambda_r, const TrainConfig& config, Rng& rng);

struct PgdfConfig {
    // Core hyper-parameters
    double m = 0.5;            // fusion coefficient
    double r = 2.0;            // hard-enhancement exponent
    double alpha = 4.0;        // mix Beta parameter
    double lambda_u = 25.0;
    double lambda_r = 1.0;
    int rampup_epochs = 16;    // linear lambda_u ramp over the first PGDF epochs
    int epochs = 50;           // total epochs, warm-up included
    int warm_up = 10;
    std::uint64_t seed = 1;

    std::vector<int> hidden = {64, 64};

    // Dividing
    double tau = 0.4;          // nominal noise ratio (estimated or configured)
    double tau_e = -1.0;       // < 0 -> 0.5 * (1 - tau)
    double tau_n1 = -1.0;      // < 0 -> 0.5 * tau
    int gmm_max_iter = 100;
    double gmm_tol = 1e-6;
    int refit_every = 1;       // GMM refit cadence in PGDF epochs
    double no_prior_easy_threshold = 0.95;

    // Prior generation
    PriorConfig prior;
    int prior_history_epochs = 20;
    int prior_refresh_every = 0; // 0 = generate once

    // Pseudo-labels
    int n_aug = 2;
    double jitter = 0.05;       // feature jitter as a fraction of per-feature std
    double temperature = 0.5;
    double ridge_epsilon = 1e-3;

    // Ablation switches
    bool use_prior = true;
    bool use_gmm = true;    // samples dividing optimization
    bool use_refine = true;
    bool use_enhance = true; // false forces r = 0
    bool two_networks = true;

    double effective_tau_e() const { return tau_e >= 0.0 ? tau_e : 0.5 * (1.0 - tau); }
    double effective_tau_n1() const { return tau_n1 >= 0.0 ? tau_n1 : 0.5 * tau; }
    double effective_r() const { return use_enhance ? r : 0.0; }
};

/// Receives one JSON line per epoch per network, already newline-free.
using MetricsSink = std::function<void(const std::string&)>;

struct PgdfResult {
    Mlp net_a;
    Mlp net_b;
    double final_test_accuracy = 0.0;   // two-model ensemble (single model if ablated)
    double final_test_accuracy_a = 0.0;
    double final_test_accuracy_b = 0.0;
    std::optional<PriorResult> prior;
    DividedSets last_divided_a; // division produced by net A in the final epoch
};

/// Full training loop: prior generation, independent warm-up of both
/// networks, then per epoch co-dividing (each net divides for its peer),
/// pseudo-label refinement, MixMatch mixing, and one reweighted
/// semi-supervised epoch per network.
PgdfResult train_pgdf(const LabeledDataset& train, const LabeledDataset& test,
                      const PgdfConfig& config, const TrainConfig& trainer,
                      const MetricsSink& sink = nullptr);

/// Plain cross-entropy baseline trained on observed labels for the same
/// total number of epochs; returns the final test accuracy.
double train_ce_baseline(const LabeledDataset& train, const LabeledDataset& test,
                         const PgdfConfig& config, const TrainConfig& trainer,
                         const MetricsSink& sink = nullptr);

} // namespace pgdf
