#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pgdf/dataset.hpp"
#include "pgdf/matrix.hpp"
#include "pgdf/rng.hpp"

namespace pgdf {

struct TrainConfig {
    double learning_rate = 0.05;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    int batch_size = 64;
    int epochs = 10;
    std::uint64_t seed = 1;
};

struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

/// Fully connected softmax classifier with tanh hidden layers. The final
/// layer produces logits; forward() applies softmax. Momentum buffers live
/// with the parameters, so one Mlp instance is one optimizer state.
class Mlp {
public:
    Mlp() = default;
    /// layer_sizes = {d, hidden..., C}; Glorot-uniform init, zero biases.
    Mlp(std::vector<int> layer_sizes, std::uint64_t seed);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    int num_classes() const { return sizes_.back(); }

    /// Softmax probabilities, one row per input row.
    Matrix forward(const Matrix& X) const;

    struct ForwardCache {
        std::vector<Matrix> layer_inputs; // input to layer l (post-activation of l-1)
        Matrix probs;
    };
    ForwardCache forward_cached(const Matrix& X) const;

    /// Backprop from d(loss)/d(logits); any loss whose logit gradient the
    /// caller can form reuses this path.
    MlpGradients backward(const ForwardCache& cache, const Matrix& dlogits) const;

    /// SGD with momentum and decoupled-into-gradient weight decay.
    void sgd_step(const MlpGradients& grads, const TrainConfig& config);

    // Flat parameter view in layer order (W then b per layer); used by the
    // finite-difference check and checkpoints.
    std::size_t num_params() const;
    double get_param(std::size_t idx) const;
    void set_param(std::size_t idx, double value);

    void save(const std::string& path) const;
    static Mlp load(const std::string& path);

private:
    std::vector<int> sizes_;
    std::vector<Matrix> weights_;              // [in x out] per layer
    std::vector<std::vector<double>> biases_;  // [out] per layer
    std::vector<Matrix> vel_w_;
    std::vector<std::vector<double>> vel_b_;
};

/// Per-sample cross-entropy -sum_c t_c log p_c under the current parameters.
std::vector<double> eval_losses(const Mlp& model, const Matrix& X, const Matrix& targets);

/// One epoch of mini-batch SGD toward `targets` (rows on the simplex) with
/// per-sample gradient weights. Returns per-sample losses measured on the
/// pre-update parameters so they are comparable across samples; eval_probs
/// (optional) receives the matching pre-update probability matrix.
std::vector<double> train_epoch(Mlp& model, const Matrix& X, const Matrix& targets,
                                const std::vector<double>& sample_weights,
                                const TrainConfig& config, Rng& rng,
                                Matrix* eval_probs = nullptr);

/// Max relative error between analytic gradients of the weighted CE loss and
/// central finite differences.
double gradient_check(const Mlp& model, const Matrix& X, const Matrix& targets,
                      const std::vector<double>& sample_weights, double epsilon);

/// sink(epoch, per-sample probability on the observed label).
using HistorySink = std::function<void(int, const std::vector<double>&)>;

/// config.epochs epochs of plain CE training on observed labels; the sink is
/// invoked once per epoch with the pre-update evaluation probabilities.
void warmup_train(Mlp& model, const LabeledDataset& dataset, const TrainConfig& config,
                  const HistorySink& sink = nullptr);

std::vector<int> predict(const Mlp& model, const Matrix& X);
double accuracy_against(const Mlp& model, const Matrix& X, const std::vector<int>& labels);

} // namespace pgdf
