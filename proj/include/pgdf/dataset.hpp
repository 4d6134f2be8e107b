#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgdf/matrix.hpp"
#include "pgdf/rng.hpp"

namespace pgdf {

struct Sample {
    int id = 0;
    std::vector<double> features;
    int observed_label = 0;
    std::optional<int> true_label; // hidden from training, evaluation only
};

/// Immutable after construction. Sample ids are always 0..N-1.
struct LabeledDataset {
    std::vector<Sample> samples;
    int num_classes = 0;
    int feature_dim = 0;

    std::size_t size() const { return samples.size(); }
    bool has_true_labels() const;

    /// N x d feature matrix (row i = sample i).
    Matrix feature_matrix() const;
    /// Feature matrix restricted to `ids`, in the given order.
    Matrix feature_matrix(const std::vector<int>& ids) const;
    /// N x C one-hot matrix of observed labels.
    Matrix observed_one_hot() const;
    std::vector<int> observed_labels() const;
    /// Per-feature standard deviation over the dataset (population).
    std::vector<double> feature_std() const;
};

enum class NoiseKind { symmetric, asymmetric };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::symmetric;
    double ratio = 0.0;                       // tau in [0,1)
    std::vector<int> permutation;             // class -> class, asymmetric only
    bool exclude_self = false;                // symmetric: resample over C-1 other classes
};

struct FlipMask {
    std::vector<bool> flipped; // flipped[i] = observed != true

    std::size_t count() const;
    double fraction() const;
};

/// C isotropic unit-variance Gaussian clusters, n samples each. Cluster means
/// sit on a circle in the first two feature dimensions with adjacent-mean
/// distance `separation`; remaining dimensions carry noise only.
LabeledDataset synth_blobs(int num_classes, int per_class, int feature_dim, double separation,
                           std::uint64_t seed);

/// Relabels floor(tau*N) samples chosen uniformly without replacement.
/// Symmetric noise resamples the label uniformly over all C classes (the
/// original class included unless spec.exclude_self); asymmetric noise applies
/// spec.permutation to the true label. True labels are never touched.
std::pair<LabeledDataset, FlipMask> inject_noise(const LabeledDataset& dataset,
                                                 const NoiseSpec& spec, std::uint64_t seed);

/// CSV schema: header f0,...,f{d-1},label[,true_label]; one row per sample.
/// Pass expected_classes > 0 to validate labels against a known C.
LabeledDataset load_csv(const std::string& path, int expected_classes = 0);
void save_csv(const LabeledDataset& dataset, const std::string& path);

/// Seeded stratified two-way split; fractions must sum to 1. Both parts are
/// re-indexed to 0..n-1.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset,
                                                std::pair<double, double> fractions,
                                                std::uint64_t seed);

struct TrainConfig; // classifier.hpp

/// Cross-fitted estimate of the fraction of labels that disagree with the
/// truth: train a warm-up classifier on one half, measure prediction/label
/// disagreement on the other half, and average over both directions.
double estimate_noise_ratio(const LabeledDataset& dataset, const TrainConfig& trainer_config,
                            std::uint64_t seed);

} // namespace pgdf
