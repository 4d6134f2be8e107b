#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgdf/classifier.hpp"
#include "pgdf/dataset.hpp"
#include "pgdf/history.hpp"
#include "pgdf/matrix.hpp"

namespace pgdf {

struct HistoryClassifierConfig {
    std::vector<int> channels = {8, 16, 16};
    int kernel = 3;
    double learning_rate = 0.05;
    double momentum = 0.9;
    int epochs = 50;
};

/// Small 1-D CNN over a length-k history row: three convolutions with tanh,
/// global average pooling, then a fully connected layer onto a 2-class
/// softmax {hard(clean), noisy}.
class HistoryClassifier {
public:
    HistoryClassifier() = default;
    HistoryClassifier(int input_len, const HistoryClassifierConfig& config, std::uint64_t seed);

    int input_len() const { return input_len_; }

    /// rows: [B x k]; returns [B x 2] softmax, column 0 = p_hard.
    Matrix forward(const Matrix& rows) const;

    /// Full-batch gradient descent with momentum on class-weighted CE.
    /// Stops early once the loss improves by less than 1e-5 over 5 epochs.
    /// Returns the number of epochs actually run.
    int train(const Matrix& rows, const std::vector<int>& labels,
              const std::vector<double>& class_weights);

    double train_accuracy(const Matrix& rows, const std::vector<int>& labels) const;

private:
    int input_len_ = 0;
    HistoryClassifierConfig config_;
    std::vector<std::vector<double>> conv_w_; // [out*in*K] per layer
    std::vector<std::vector<double>> conv_b_;
    Matrix fc_w_; // [last_channels x 2]
    std::vector<double> fc_b_;
    std::vector<std::vector<double>> vel_conv_w_, vel_conv_b_;
    Matrix vel_fc_w_;
    std::vector<double> vel_fc_b_;

    struct Cache;
    Matrix forward_impl(const Matrix& rows, Cache* cache) const;
};

/// Three-way prior over sample ids plus the middle-band classifier outputs.
/// easy / hard / noisy_direct / noisy_classified partition [0,N).
struct PriorPartition {
    std::size_t num_samples = 0;
    std::vector<int> easy_ids;
    std::vector<int> hard_ids;
    std::vector<int> noisy_direct_ids;     // quantile tail
    std::vector<int> noisy_classified_ids; // middle band judged noisy
    std::vector<int> middle_ids;           // hard + noisy_classified, ascending
    std::vector<double> p_hard;            // parallel to middle_ids
    std::vector<double> p_noisy;

    std::vector<int> noisy_ids() const; // direct + classified, ascending
    std::string to_json() const;
};

struct PriorConfig {
    HistoryClassifierConfig mm;
    bool noise_exclude_self = false;
    bool retrain_from_scratch = true; // kept as a switch; fine-tuning not implemented
};

struct PriorResult {
    PriorPartition partition;
    MeanHistory dataset_means; // H_m of the full dataset run
    MeanHistory da_means;      // mean history of the artificial noisy set
    FlipMask da_flips;         // which artificial labels were flipped
    std::vector<int> da_source_ids;
    double mm_train_accuracy = 0.0;
    int mm_epochs_run = 0;
};

/// Copies the easy subset, treats its current labels as ground truth, and
/// injects symmetric noise at ratio tau. The flip mask marks actual changes.
std::pair<LabeledDataset, FlipMask> build_da(const LabeledDataset& dataset,
                                             const std::vector<int>& easy_ids, double tau,
                                             std::uint64_t seed, bool exclude_self = false);

/// Trains the history classifier from the artificial set: retrains a fresh
/// model on da recording its history, drops the top tau_e / bottom tau_n1
/// bands, and fits the classifier on the remaining (history row, flipped)
/// pairs with inverse-frequency class weights.
struct TrainMmResult {
    HistoryClassifier mm;
    MeanHistory da_means;
    double train_accuracy = 0.0;
    int epochs_run = 0;
};
TrainMmResult train_mm(const LabeledDataset& da, const FlipMask& da_flips, double tau_e,
                       double tau_n1, const HistoryClassifierConfig& mm_config,
                       const std::vector<int>& hidden, const TrainConfig& trainer_config,
                       std::uint64_t seed);

/// [m x 2] softmax over {hard, noisy} for middle-band history rows.
Matrix classify_middle(const HistoryClassifier& mm, const Matrix& rows);

/// Full prior generation: warm-train on the dataset recording history,
/// quantile-select easy/noisy/middle, build the artificial set, train the
/// history classifier, and classify the middle band (ties go to noisy).
PriorResult generate_prior(const LabeledDataset& dataset, const std::vector<int>& hidden,
                           const TrainConfig& trainer_config, const PriorConfig& prior_config,
                           double tau, double tau_e, double tau_n1, std::uint64_t seed);

} // namespace pgdf
