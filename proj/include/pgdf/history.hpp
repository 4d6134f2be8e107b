#pragma once

#include <string>
#include <vector>

#include "pgdf/dataset.hpp"

namespace pgdf {

/// Per-sample, per-epoch predicted probability on the observed label.
/// Columns must be recorded in epoch order, each exactly once.
class ProbabilityHistory {
public:
    ProbabilityHistory() = default;
    explicit ProbabilityHistory(std::size_t num_samples) : num_samples_(num_samples) {}

    std::size_t num_samples() const { return num_samples_; }
    std::size_t epochs() const { return columns_.size(); }

    void record(int epoch_index, const std::vector<double>& per_sample_probs);

    double at(std::size_t sample, std::size_t epoch) const { return columns_[epoch][sample]; }
    /// Row for one sample across all epochs (length k).
    std::vector<double> row(std::size_t sample) const;

private:
    std::size_t num_samples_ = 0;
    std::vector<std::vector<double>> columns_;
};

using MeanHistory = std::vector<double>;

/// Row-wise arithmetic mean.
MeanHistory mean_history(const ProbabilityHistory& history);

struct QuantileSelection {
    std::vector<int> easy_ids;   // top floor(N*tau_e) by mean, descending
    std::vector<int> noisy_ids;  // bottom floor(N*tau_n1)
    std::vector<int> middle_ids; // remainder
};

/// Sorts ids descending by mean probability (ties broken by ascending id) and
/// cuts the top tau_e and bottom tau_n1 fractions. The three sets partition
/// [0,N); each returned set is sorted ascending by id.
QuantileSelection select_by_quantile(const MeanHistory& means, double tau_e, double tau_n1);

struct SeparationReport {
    double mean_clean = 0.0;
    double mean_noisy = 0.0;
    double std_clean = 0.0;
    double std_noisy = 0.0;
    double pooled_std = 0.0;
    std::size_t n_clean = 0;
    std::size_t n_noisy = 0;
    // 50 fixed-width bins over [0,1].
    std::vector<std::size_t> hist_clean;
    std::vector<std::size_t> hist_noisy;

    std::string to_json() const;
};

/// Evaluation-only diagnostic: clean/noisy mean-probability statistics and
/// histograms, for the same plot data the training-history picture is drawn
/// from.
SeparationReport separation_report(const MeanHistory& means, const FlipMask& flip_mask);

/// CSV dump, one row per sample: id,h_1,...,h_k
void save_history_csv(const ProbabilityHistory& history, const std::string& path);

} // namespace pgdf
