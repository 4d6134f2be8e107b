#include "pgdf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pgdf/errors.hpp"
#include "pgdf/kernels.hpp"

namespace pgdf {

namespace {
constexpr double kLogFloor = 1e-12;
}

Mlp::Mlp(std::vector<int> layer_sizes, std::uint64_t seed) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw config_error("Mlp: need at least input and output layer sizes");
    for (int s : sizes_)
        if (s < 1) throw config_error("Mlp: layer sizes must be positive");

    Rng rng = make_rng(seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const int in = sizes_[l], out = sizes_[l + 1];
        const double bound = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> uni(-bound, bound);
        Matrix W(in, out);
        for (double& w : W.data) w = uni(rng);
        weights_.push_back(std::move(W));
        biases_.emplace_back(out, 0.0);
        vel_w_.emplace_back(in, out);
        vel_b_.emplace_back(out, 0.0);
    }
}

Matrix Mlp::forward(const Matrix& X) const {
    if (static_cast<int>(X.cols) != input_dim()) throw shape_error("Mlp::forward: feature dim");
    Matrix cur = X, z, probs;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        kernels::linear_forward(cur, weights_[l], biases_[l], z);
        if (l + 1 < weights_.size())
            kernels::tanh_forward(z, cur);
        else
            kernels::softmax_rows(z, probs);
    }
    return probs;
}

Mlp::ForwardCache Mlp::forward_cached(const Matrix& X) const {
    if (static_cast<int>(X.cols) != input_dim())
        throw shape_error("Mlp::forward_cached: feature dim");
    ForwardCache cache;
    cache.layer_inputs.reserve(weights_.size());
    Matrix cur = X, z;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        cache.layer_inputs.push_back(cur);
        kernels::linear_forward(cur, weights_[l], biases_[l], z);
        if (l + 1 < weights_.size())
            kernels::tanh_forward(z, cur);
        else
            kernels::softmax_rows(z, cache.probs);
    }
    return cache;
}

MlpGradients Mlp::backward(const ForwardCache& cache, const Matrix& dlogits) const {
    MlpGradients grads;
    grads.weights.resize(weights_.size());
    grads.biases.resize(weights_.size());

    Matrix delta = dlogits, d_act, d_pre;
    for (std::size_t l = weights_.size(); l-- > 0;) {
        kernels::linear_grad_params(cache.layer_inputs[l], delta, grads.weights[l],
                                    grads.biases[l]);
        if (l == 0) break;
        kernels::linear_grad_input(delta, weights_[l], d_act);
        // layer_inputs[l] is the tanh output feeding layer l
        kernels::tanh_backward(cache.layer_inputs[l], d_act, d_pre);
        delta = std::move(d_pre);
    }
    return grads;
}

void Mlp::sgd_step(const MlpGradients& grads, const TrainConfig& config) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Matrix& W = weights_[l];
        Matrix& vW = vel_w_[l];
        const Matrix& gW = grads.weights[l];
        for (std::size_t i = 0; i < W.data.size(); ++i) {
            const double g = gW.data[i] + config.weight_decay * W.data[i];
            vW.data[i] = config.momentum * vW.data[i] + g;
            W.data[i] -= config.learning_rate * vW.data[i];
        }
        std::vector<double>& b = biases_[l];
        std::vector<double>& vb = vel_b_[l];
        const std::vector<double>& gb = grads.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
            vb[i] = config.momentum * vb[i] + gb[i];
            b[i] -= config.learning_rate * vb[i];
        }
    }
}

std::size_t Mlp::num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += weights_[l].data.size() + biases_[l].size();
    return n;
}

double Mlp::get_param(std::size_t idx) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (idx < weights_[l].data.size()) return weights_[l].data[idx];
        idx -= weights_[l].data.size();
        if (idx < biases_[l].size()) return biases_[l][idx];
        idx -= biases_[l].size();
    }
    throw usage_error("Mlp::get_param: index out of range");
}

void Mlp::set_param(std::size_t idx, double value) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (idx < weights_[l].data.size()) {
            weights_[l].data[idx] = value;
            return;
        }
        idx -= weights_[l].data.size();
        if (idx < biases_[l].size()) {
            biases_[l][idx] = value;
            return;
        }
        idx -= biases_[l].size();
    }
    throw usage_error("Mlp::set_param: index out of range");
}

void Mlp::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ingestion_error("Mlp::save: cannot open " + path);
    out << "pgdf-mlp v1\n";
    out << "layers " << sizes_.size();
    for (int s : sizes_) out << " " << s;
    out << "\n";
    out << "params " << num_params() << "\n";
    char buf[40];
    for (std::size_t i = 0; i < num_params(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", get_param(i));
        out << buf << "\n";
    }
    if (!out) throw ingestion_error("Mlp::save: write failed for " + path);
}

Mlp Mlp::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ingestion_error("Mlp::load: cannot open " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "pgdf-mlp" || version != "v1")
        throw ingestion_error("Mlp::load: not a pgdf-mlp v1 checkpoint: " + path);
    std::string tag;
    std::size_t n_layers = 0;
    in >> tag >> n_layers;
    if (tag != "layers" || n_layers < 2)
        throw ingestion_error("Mlp::load: bad layers header in " + path);
    std::vector<int> sizes(n_layers);
    for (auto& s : sizes) in >> s;
    std::size_t n_params = 0;
    in >> tag >> n_params;
    if (tag != "params") throw ingestion_error("Mlp::load: bad params header in " + path);

    Mlp model(sizes, 0);
    if (model.num_params() != n_params)
        throw ingestion_error("Mlp::load: parameter count mismatch in " + path);
    for (std::size_t i = 0; i < n_params; ++i) {
        double v;
        if (!(in >> v)) throw ingestion_error("Mlp::load: truncated checkpoint " + path);
        model.set_param(i, v);
    }
    return model;
}

std::vector<double> eval_losses(const Mlp& model, const Matrix& X, const Matrix& targets) {
    const Matrix probs = model.forward(X);
    require_shape(targets, probs.rows, probs.cols, "eval_losses targets");
    std::vector<double> losses(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < probs.cols; ++c) {
            const double t = targets(i, c);
            if (t != 0.0) acc -= t * std::log(std::max(probs(i, c), kLogFloor));
        }
        losses[i] = acc;
    }
    return losses;
}

std::vector<double> train_epoch(Mlp& model, const Matrix& X, const Matrix& targets,
                                const std::vector<double>& sample_weights,
                                const TrainConfig& config, Rng& rng, Matrix* eval_probs) {
    const std::size_t N = X.rows;
    if (targets.rows != N || sample_weights.size() != N)
        throw shape_error("train_epoch: rows of X, targets and weights must agree");
    for (double w : sample_weights)
        if (w < 0.0) throw usage_error("train_epoch: negative sample weight");

    // Evaluation pass on frozen parameters; these losses feed the GMM.
    Matrix probs = model.forward(X);
    std::vector<double> losses(N);
    for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < probs.cols; ++c) {
            const double t = targets(i, c);
            if (t != 0.0) acc -= t * std::log(std::max(probs(i, c), kLogFloor));
        }
        if (!std::isfinite(acc))
            throw numeric_fault("train_epoch: non-finite loss for sample " + std::to_string(i));
        losses[i] = acc;
    }
    if (eval_probs) *eval_probs = std::move(probs);

    if (config.learning_rate == 0.0) return losses;

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t bs = static_cast<std::size_t>(std::max(1, config.batch_size));
    for (std::size_t start = 0; start < N; start += bs) {
        const std::size_t b = std::min(bs, N - start);
        Matrix xb(b, X.cols), tb(b, targets.cols);
        std::vector<double> wb(b);
        for (std::size_t r = 0; r < b; ++r) {
            const std::size_t src = order[start + r];
            std::copy(X.row_ptr(src), X.row_ptr(src) + X.cols, xb.row_ptr(r));
            std::copy(targets.row_ptr(src), targets.row_ptr(src) + targets.cols, tb.row_ptr(r));
            wb[r] = sample_weights[src];
        }
        Mlp::ForwardCache cache = model.forward_cached(xb);
        // d(mean weighted CE)/d(logits) = w_i (p_i - t_i) / B
        Matrix dlogits(b, tb.cols);
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t c = 0; c < tb.cols; ++c)
                dlogits(r, c) = wb[r] * (cache.probs(r, c) - tb(r, c)) / static_cast<double>(b);
        model.sgd_step(model.backward(cache, dlogits), config);
    }
    return losses;
}

double gradient_check(const Mlp& model, const Matrix& X, const Matrix& targets,
                      const std::vector<double>& sample_weights, double epsilon) {
    if (epsilon < 1e-6 || epsilon > 1e-3)
        throw config_error("gradient_check: epsilon must be in [1e-6, 1e-3]");

    const double B = static_cast<double>(X.rows);
    auto loss_of = [&](const Mlp& m) {
        const std::vector<double> losses = eval_losses(m, X, targets);
        double acc = 0.0;
        for (std::size_t i = 0; i < losses.size(); ++i) acc += sample_weights[i] * losses[i];
        return acc / B;
    };

    Mlp::ForwardCache cache = model.forward_cached(X);
    Matrix dlogits(X.rows, targets.cols);
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t c = 0; c < targets.cols; ++c)
            dlogits(r, c) = sample_weights[r] * (cache.probs(r, c) - targets(r, c)) / B;
    const MlpGradients grads = model.backward(cache, dlogits);

    std::vector<double> flat;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        flat.insert(flat.end(), grads.weights[l].data.begin(), grads.weights[l].data.end());
        flat.insert(flat.end(), grads.biases[l].begin(), grads.biases[l].end());
    }

    Mlp probe = model;
    double max_rel = 0.0;
    for (std::size_t p = 0; p < flat.size(); ++p) {
        const double orig = probe.get_param(p);
        probe.set_param(p, orig + epsilon);
        const double up = loss_of(probe);
        probe.set_param(p, orig - epsilon);
        const double down = loss_of(probe);
        probe.set_param(p, orig);
        const double numeric = (up - down) / (2.0 * epsilon);
        const double analytic = flat[p];
        const double scale = std::max(std::abs(analytic), std::abs(numeric));
        if (scale < 1e-10) continue; // both effectively zero
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / scale);
    }
    return max_rel;
}

void warmup_train(Mlp& model, const LabeledDataset& dataset, const TrainConfig& config,
                  const HistorySink& sink) {
    if (dataset.samples.empty()) throw usage_error("warmup_train: empty dataset");
    const Matrix X = dataset.feature_matrix();
    const Matrix T = dataset.observed_one_hot();
    const std::vector<double> weights(dataset.size(), 1.0);
    Rng rng = make_rng(config.seed);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Matrix probs;
        train_epoch(model, X, T, weights, config, rng, &probs);
        if (sink) {
            std::vector<double> on_observed(dataset.size());
            for (std::size_t i = 0; i < dataset.size(); ++i)
                on_observed[i] = probs(i, dataset.samples[i].observed_label);
            sink(epoch, on_observed);
        }
    }
}

std::vector<int> predict(const Mlp& model, const Matrix& X) {
    const Matrix probs = model.forward(X);
    std::vector<int> labels(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const double* row = probs.row_ptr(i);
        labels[i] = static_cast<int>(std::max_element(row, row + probs.cols) - row);
    }
    return labels;
}

double accuracy_against(const Mlp& model, const Matrix& X, const std::vector<int>& labels) {
    const std::vector<int> preds = predict(model, X);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == labels[i]) ++hit;
    return preds.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(preds.size());
}

} // namespace pgdf
