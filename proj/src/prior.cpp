#include "pgdf/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pgdf/errors.hpp"
#include "pgdf/kernels.hpp"

#include "json.hpp"

namespace pgdf {

namespace {
// Buffers for one conv layer in [batch, channels, len] layout.
struct ConvActs {
    std::vector<double> pre;  // conv output
    std::vector<double> post; // tanh(pre)
};
} // namespace

struct HistoryClassifier::Cache {
    std::vector<double> input; // [B,1,k]
    std::vector<ConvActs> conv;
    Matrix pooled; // [B x last_channels]
    Matrix probs;  // [B x 2]
};

HistoryClassifier::HistoryClassifier(int input_len, const HistoryClassifierConfig& config,
                                     std::uint64_t seed)
    : input_len_(input_len), config_(config) {
    if (input_len < 1) throw config_error("HistoryClassifier: input length must be >= 1");
    if (config.kernel < 1 || config.kernel % 2 == 0)
        throw config_error("HistoryClassifier: kernel must be odd and >= 1");
    if (config.channels.empty()) throw config_error("HistoryClassifier: need conv channels");

    Rng rng = make_rng(seed);
    int in_ch = 1;
    for (int out_ch : config.channels) {
        const double bound = std::sqrt(6.0 / (in_ch * config.kernel + out_ch));
        std::uniform_real_distribution<double> uni(-bound, bound);
        std::vector<double> w(static_cast<std::size_t>(out_ch) * in_ch * config.kernel);
        for (double& v : w) v = uni(rng);
        conv_w_.push_back(std::move(w));
        conv_b_.emplace_back(out_ch, 0.0);
        vel_conv_w_.emplace_back(static_cast<std::size_t>(out_ch) * in_ch * config.kernel, 0.0);
        vel_conv_b_.emplace_back(out_ch, 0.0);
        in_ch = out_ch;
    }
    const double bound = std::sqrt(6.0 / (in_ch + 2));
    std::uniform_real_distribution<double> uni(-bound, bound);
    fc_w_ = Matrix(in_ch, 2);
    for (double& v : fc_w_.data) v = uni(rng);
    fc_b_.assign(2, 0.0);
    vel_fc_w_ = Matrix(in_ch, 2);
    vel_fc_b_.assign(2, 0.0);
}

Matrix HistoryClassifier::forward_impl(const Matrix& rows, Cache* cache) const {
    if (static_cast<int>(rows.cols) != input_len_)
        throw shape_error("HistoryClassifier: history row length " + std::to_string(rows.cols) +
                          " does not match input length " + std::to_string(input_len_));
    const std::size_t B = rows.rows;
    const std::size_t L = static_cast<std::size_t>(input_len_);
    const std::size_t pad = static_cast<std::size_t>(config_.kernel / 2);

    std::vector<double> cur = rows.data; // [B,1,L]
    std::size_t in_ch = 1;
    std::vector<ConvActs> acts(conv_w_.size());
    for (std::size_t l = 0; l < conv_w_.size(); ++l) {
        const std::size_t out_ch = conv_b_[l].size();
        kernels::ConvDims dims{B, in_ch, out_ch, L, static_cast<std::size_t>(config_.kernel), pad};
        kernels::conv1d_forward(dims, cur, conv_w_[l], conv_b_[l], acts[l].pre);
        acts[l].post.resize(acts[l].pre.size());
        for (std::size_t i = 0; i < acts[l].pre.size(); ++i)
            acts[l].post[i] = std::tanh(acts[l].pre[i]);
        cur = acts[l].post;
        in_ch = out_ch;
    }

    // Global average pool over positions.
    Matrix pooled(B, in_ch);
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t c = 0; c < in_ch; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < L; ++t) acc += cur[(n * in_ch + c) * L + t];
            pooled(n, c) = acc / static_cast<double>(L);
        }

    Matrix logits, probs;
    kernels::linear_forward(pooled, fc_w_, fc_b_, logits);
    kernels::softmax_rows(logits, probs);

    if (cache) {
        cache->input = rows.data;
        cache->conv = std::move(acts);
        cache->pooled = std::move(pooled);
        cache->probs = probs;
    }
    return probs;
}

Matrix HistoryClassifier::forward(const Matrix& rows) const { return forward_impl(rows, nullptr); }

int HistoryClassifier::train(const Matrix& rows, const std::vector<int>& labels,
                             const std::vector<double>& class_weights) {
    const std::size_t B = rows.rows;
    if (labels.size() != B) throw shape_error("HistoryClassifier::train: label count");
    const std::size_t L = static_cast<std::size_t>(input_len_);
    const std::size_t K = static_cast<std::size_t>(config_.kernel);
    const std::size_t pad = K / 2;

    std::vector<double> losses;
    int epochs_run = 0;
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        Cache cache;
        forward_impl(rows, &cache);

        double loss = 0.0;
        Matrix dlogits(B, 2);
        for (std::size_t i = 0; i < B; ++i) {
            const double w = class_weights[static_cast<std::size_t>(labels[i])];
            loss -= w * std::log(std::max(cache.probs(i, labels[i]), 1e-12));
            for (std::size_t c = 0; c < 2; ++c) {
                const double t = labels[i] == static_cast<int>(c) ? 1.0 : 0.0;
                dlogits(i, c) = w * (cache.probs(i, c) - t) / static_cast<double>(B);
            }
        }
        loss /= static_cast<double>(B);
        if (!std::isfinite(loss)) throw numeric_fault("HistoryClassifier::train: non-finite loss");
        losses.push_back(loss);
        ++epochs_run;
        if (losses.size() > 5 && losses[losses.size() - 6] - loss < 1e-5) break;

        // FC backward
        Matrix d_fc_w;
        std::vector<double> d_fc_b;
        kernels::linear_grad_params(cache.pooled, dlogits, d_fc_w, d_fc_b);
        Matrix d_pooled;
        kernels::linear_grad_input(dlogits, fc_w_, d_pooled);

        // Un-pool: spread gradient evenly over positions.
        const std::size_t last_ch = conv_b_.back().size();
        std::vector<double> d_post(B * last_ch * L);
        for (std::size_t n = 0; n < B; ++n)
            for (std::size_t c = 0; c < last_ch; ++c) {
                const double g = d_pooled(n, c) / static_cast<double>(L);
                for (std::size_t t = 0; t < L; ++t) d_post[(n * last_ch + c) * L + t] = g;
            }

        // Conv stack backward.
        std::vector<std::vector<double>> d_conv_w(conv_w_.size());
        std::vector<std::vector<double>> d_conv_b(conv_w_.size());
        std::vector<double> delta = std::move(d_post);
        for (std::size_t l = conv_w_.size(); l-- > 0;) {
            const std::size_t out_ch = conv_b_[l].size();
            const std::size_t in_ch = l == 0 ? 1 : conv_b_[l - 1].size();
            // tanh backward at this layer's output
            const std::vector<double>& post = cache.conv[l].post;
            for (std::size_t i = 0; i < delta.size(); ++i) {
                const double a = post[i];
                delta[i] *= (1.0 - a * a);
            }
            kernels::ConvDims dims{B, in_ch, out_ch, L, K, pad};
            const std::vector<double>& layer_in = l == 0 ? cache.input : cache.conv[l - 1].post;
            kernels::conv1d_grad_params(dims, layer_in, delta, d_conv_w[l], d_conv_b[l]);
            if (l > 0) {
                std::vector<double> d_in;
                kernels::conv1d_grad_input(dims, delta, conv_w_[l], d_in);
                delta = std::move(d_in);
            }
        }

        // Momentum SGD step.
        auto step_vec = [&](std::vector<double>& p, std::vector<double>& v,
                            const std::vector<double>& g) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                v[i] = config_.momentum * v[i] + g[i];
                p[i] -= config_.learning_rate * v[i];
            }
        };
        for (std::size_t l = 0; l < conv_w_.size(); ++l) {
            step_vec(conv_w_[l], vel_conv_w_[l], d_conv_w[l]);
            step_vec(conv_b_[l], vel_conv_b_[l], d_conv_b[l]);
        }
        step_vec(fc_w_.data, vel_fc_w_.data, d_fc_w.data);
        step_vec(fc_b_, vel_fc_b_, d_fc_b);
    }
    return epochs_run;
}

double HistoryClassifier::train_accuracy(const Matrix& rows, const std::vector<int>& labels) const {
    const Matrix probs = forward(rows);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < rows.rows; ++i) {
        const int pred = probs(i, 0) >= probs(i, 1) ? 0 : 1;
        if (pred == labels[i]) ++hit;
    }
    return rows.rows == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(rows.rows);
}

std::vector<int> PriorPartition::noisy_ids() const {
    std::vector<int> ids = noisy_direct_ids;
    ids.insert(ids.end(), noisy_classified_ids.begin(), noisy_classified_ids.end());
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::string PriorPartition::to_json() const {
    nlohmann::ordered_json j;
    j["num_samples"] = num_samples;
    j["easy"] = easy_ids;
    j["hard"] = hard_ids;
    j["noisy_direct"] = noisy_direct_ids;
    j["noisy_classified"] = noisy_classified_ids;
    j["middle"] = middle_ids;
    j["p_h"] = p_hard;
    j["p_n"] = p_noisy;
    return j.dump(2);
}

std::pair<LabeledDataset, FlipMask> build_da(const LabeledDataset& dataset,
                                             const std::vector<int>& easy_ids, double tau,
                                             std::uint64_t seed, bool exclude_self) {
    if (easy_ids.empty()) throw degenerate_error("build_da: empty easy set");

    LabeledDataset subset;
    subset.num_classes = dataset.num_classes;
    subset.feature_dim = dataset.feature_dim;
    subset.samples.reserve(easy_ids.size());
    for (int id : easy_ids) {
        Sample s = dataset.samples.at(static_cast<std::size_t>(id));
        s.id = static_cast<int>(subset.samples.size());
        s.true_label = s.observed_label; // easy labels act as ground truth here
        subset.samples.push_back(std::move(s));
    }
    NoiseSpec spec;
    spec.kind = NoiseKind::symmetric;
    spec.ratio = tau;
    spec.exclude_self = exclude_self;
    return inject_noise(subset, spec, seed);
}

TrainMmResult train_mm(const LabeledDataset& da, const FlipMask& da_flips, double tau_e,
                       double tau_n1, const HistoryClassifierConfig& mm_config,
                       const std::vector<int>& hidden, const TrainConfig& trainer_config,
                       std::uint64_t seed) {
    if (da.samples.empty()) throw degenerate_error("train_mm: empty artificial set");

    // Retrain the classification model from scratch on the artificial set,
    // recording its history with the same epoch count as the original run.
    std::vector<int> sizes;
    sizes.push_back(da.feature_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(da.num_classes);
    Mlp model(sizes, derive_seed(seed, 0));

    ProbabilityHistory hn(da.size());
    TrainConfig cfg = trainer_config;
    cfg.seed = derive_seed(seed, 1);
    warmup_train(model, da, cfg,
                 [&](int epoch, const std::vector<double>& probs) { hn.record(epoch, probs); });

    TrainMmResult result;
    result.da_means = mean_history(hn);

    const QuantileSelection sel = select_by_quantile(result.da_means, tau_e, tau_n1);
    if (sel.middle_ids.empty())
        throw degenerate_error("train_mm: middle band of the artificial set is empty");

    Matrix rows(sel.middle_ids.size(), hn.epochs());
    std::vector<int> labels(sel.middle_ids.size());
    std::size_t n_noisy = 0;
    for (std::size_t i = 0; i < sel.middle_ids.size(); ++i) {
        const int id = sel.middle_ids[i];
        const std::vector<double> row = hn.row(static_cast<std::size_t>(id));
        std::copy(row.begin(), row.end(), rows.row_ptr(i));
        labels[i] = da_flips.flipped[static_cast<std::size_t>(id)] ? 1 : 0;
        n_noisy += static_cast<std::size_t>(labels[i]);
    }
    const std::size_t n_clean = sel.middle_ids.size() - n_noisy;
    if (n_noisy == 0 || n_clean == 0)
        throw degenerate_error("train_mm: middle band has a single class, cannot train");

    // Inverse-frequency class weights keep the skewed middle band from
    // collapsing onto the majority class.
    const double total = static_cast<double>(sel.middle_ids.size());
    std::vector<double> class_weights = {total / (2.0 * static_cast<double>(n_clean)),
                                         total / (2.0 * static_cast<double>(n_noisy))};

    result.mm = HistoryClassifier(static_cast<int>(hn.epochs()), mm_config, derive_seed(seed, 2));
    result.epochs_run = result.mm.train(rows, labels, class_weights);
    result.train_accuracy = result.mm.train_accuracy(rows, labels);
    return result;
}

Matrix classify_middle(const HistoryClassifier& mm, const Matrix& rows) {
    return mm.forward(rows);
}

PriorResult generate_prior(const LabeledDataset& dataset, const std::vector<int>& hidden,
                           const TrainConfig& trainer_config, const PriorConfig& prior_config,
                           double tau, double tau_e, double tau_n1, std::uint64_t seed) {
    PriorResult result;

    // Step 1: train the classification model on the full dataset, record H.
    std::vector<int> sizes;
    sizes.push_back(dataset.feature_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(dataset.num_classes);
    Mlp mc(sizes, derive_seed(seed, 10));
    ProbabilityHistory history(dataset.size());
    TrainConfig cfg = trainer_config;
    cfg.seed = derive_seed(seed, 11);
    warmup_train(mc, dataset, cfg, [&](int epoch, const std::vector<double>& probs) {
        history.record(epoch, probs);
    });
    result.dataset_means = mean_history(history);

    // Step 2: quantile selection.
    const QuantileSelection sel = select_by_quantile(result.dataset_means, tau_e, tau_n1);
    if (sel.easy_ids.empty()) throw degenerate_error("generate_prior: empty easy set");

    // Steps 3-6: artificial noisy set and history classifier.
    auto [da, da_flips] =
        build_da(dataset, sel.easy_ids, tau, derive_seed(seed, 12), prior_config.noise_exclude_self);
    TrainMmResult mm = train_mm(da, da_flips, tau_e, tau_n1, prior_config.mm, hidden,
                                trainer_config, derive_seed(seed, 13));
    result.da_means = std::move(mm.da_means);
    result.da_flips = std::move(da_flips);
    result.da_source_ids = sel.easy_ids;
    result.mm_train_accuracy = mm.train_accuracy;
    result.mm_epochs_run = mm.epochs_run;

    // Step 7: classify the middle band; ties go to noisy.
    PriorPartition part;
    part.num_samples = dataset.size();
    part.easy_ids = sel.easy_ids;
    part.noisy_direct_ids = sel.noisy_ids;
    part.middle_ids = sel.middle_ids;
    if (!sel.middle_ids.empty()) {
        Matrix rows(sel.middle_ids.size(), history.epochs());
        for (std::size_t i = 0; i < sel.middle_ids.size(); ++i) {
            const std::vector<double> row =
                history.row(static_cast<std::size_t>(sel.middle_ids[i]));
            std::copy(row.begin(), row.end(), rows.row_ptr(i));
        }
        const Matrix probs = classify_middle(mm.mm, rows);
        part.p_hard.resize(sel.middle_ids.size());
        part.p_noisy.resize(sel.middle_ids.size());
        for (std::size_t i = 0; i < sel.middle_ids.size(); ++i) {
            part.p_hard[i] = probs(i, 0);
            part.p_noisy[i] = probs(i, 1);
            if (part.p_hard[i] > 0.5)
                part.hard_ids.push_back(sel.middle_ids[i]);
            else
                part.noisy_classified_ids.push_back(sel.middle_ids[i]);
        }
    }
    result.partition = std::move(part);
    return result;
}

} // namespace pgdf
