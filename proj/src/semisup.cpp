#include "pgdf/semisup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pgdf/divide.hpp"
#include "pgdf/errors.hpp"
#include "pgdf/gmm.hpp"
#include "pgdf/refine.hpp"

#include "json.hpp"

namespace pgdf {

namespace {

constexpr double kLogFloor = 1e-12;

double beta_draw(double alpha, Rng& rng) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    const double a = gamma(rng);
    const double b = gamma(rng);
    return a / (a + b);
}

void mix_into(const Matrix& first_x, const Matrix& first_t, const Matrix& pool_x,
              const Matrix& pool_t, double alpha, Rng& rng, MixedSet& out, int first_offset) {
    const std::size_t n = first_x.rows;
    const std::size_t d = first_x.cols;
    const std::size_t c = first_t.cols;
    out.features = Matrix(n, d);
    out.targets = Matrix(n, c);
    out.pair_ids.resize(n);
    out.lambdas.resize(n);
    std::uniform_int_distribution<std::size_t> pick(0, pool_x.rows - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t partner = pick(rng);
        const double lam = beta_draw(alpha, rng);
        const double lam_p = std::max(lam, 1.0 - lam);
        out.pair_ids[i] = {first_offset + static_cast<int>(i), static_cast<int>(partner)};
        out.lambdas[i] = lam_p;
        for (std::size_t f = 0; f < d; ++f)
            out.features(i, f) = lam_p * first_x(i, f) + (1.0 - lam_p) * pool_x(partner, f);
        for (std::size_t k = 0; k < c; ++k)
            out.targets(i, k) = lam_p * first_t(i, k) + (1.0 - lam_p) * pool_t(partner, k);
    }
}

// dL/dz_k = q_k * (g_k - sum_c g_c q_c) for g = dL/dq on one softmax row.
void softmax_vjp_row(const double* q, const double* g, double* out, std::size_t C) {
    double dot = 0.0;
    for (std::size_t c = 0; c < C; ++c) dot += g[c] * q[c];
    for (std::size_t c = 0; c < C; ++c) out[c] = q[c] * (g[c] - dot);
}

} // namespace

MixResult mix(const Matrix& labeled_x, const Matrix& labeled_t,
              const std::vector<double>& labeled_w, const Matrix& unlabeled_x,
              const Matrix& unlabeled_t, double alpha, Rng& rng) {
    if (labeled_x.rows == 0) throw degenerate_error("mix: empty labeled set, cannot proceed");
    if (alpha <= 0.0) throw config_error("mix: alpha must be > 0");
    if (labeled_w.size() != labeled_x.rows) throw shape_error("mix: labeled weight count");

    // Mixing pool: labeled rows first, then unlabeled rows.
    const std::size_t nl = labeled_x.rows, nu = unlabeled_x.rows;
    Matrix pool_x(nl + nu, labeled_x.cols);
    Matrix pool_t(nl + nu, labeled_t.cols);
    std::copy(labeled_x.data.begin(), labeled_x.data.end(), pool_x.data.begin());
    std::copy(labeled_t.data.begin(), labeled_t.data.end(), pool_t.data.begin());
    if (nu > 0) {
        std::copy(unlabeled_x.data.begin(), unlabeled_x.data.end(),
                  pool_x.data.begin() + static_cast<std::ptrdiff_t>(nl * labeled_x.cols));
        std::copy(unlabeled_t.data.begin(), unlabeled_t.data.end(),
                  pool_t.data.begin() + static_cast<std::ptrdiff_t>(nl * labeled_t.cols));
    }

    MixResult result;
    mix_into(labeled_x, labeled_t, pool_x, pool_t, alpha, rng, result.labeled, 0);
    result.labeled.weights = labeled_w;
    if (nu > 0) {
        mix_into(unlabeled_x, unlabeled_t, pool_x, pool_t, alpha, rng, result.unlabeled,
                 static_cast<int>(nl));
    }
    return result;
}

double loss_labeled(const Mlp& model, const Matrix& X, const Matrix& targets,
                    const std::vector<double>& weights, double r) {
    if (X.rows == 0) return 0.0;
    const Matrix probs = model.forward(X);
    double acc = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        if (!(weights[i] > 0.0))
            throw usage_error("loss_labeled: labeled sample with weight 0");
        double ce = 0.0;
        for (std::size_t c = 0; c < probs.cols; ++c)
            ce -= targets(i, c) * std::log(std::max(probs(i, c), kLogFloor));
        acc += ce / std::pow(weights[i], r);
    }
    return acc / static_cast<double>(X.rows);
}

double loss_unlabeled(const Mlp& model, const Matrix& X, const Matrix& targets) {
    if (X.rows == 0) return 0.0;
    const Matrix probs = model.forward(X);
    double acc = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t c = 0; c < probs.cols; ++c) {
            const double d = targets(i, c) - probs(i, c);
            acc += d * d;
        }
    return acc / static_cast<double>(X.rows);
}

double loss_reg_term(const Mlp& model, const Matrix& X_union, const std::vector<double>& pi) {
    if (X_union.rows == 0) return 0.0;
    const Matrix probs = model.forward(X_union);
    double acc = 0.0;
    for (std::size_t c = 0; c < probs.cols; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < probs.rows; ++i) mean += probs(i, c);
        mean /= static_cast<double>(probs.rows);
        acc += pi[c] * std::log(pi[c] / mean);
    }
    return acc;
}

double total_loss(double loss_x, double loss_u, double loss_reg, double lambda_u,
                  double lambda_r) {
    return loss_x + lambda_u * loss_u + lambda_r * loss_reg;
}

LossBreakdown train_mixed_epoch(Mlp& model, const MixResult& mixed, double r, double lambda_u,
                                double lambda_r, const TrainConfig& config, Rng& rng) {
    const std::size_t nl = mixed.labeled.features.rows;
    const std::size_t nu = mixed.unlabeled.features.rows;
    if (nl == 0) throw degenerate_error("train_mixed_epoch: empty labeled set");
    const std::size_t C = static_cast<std::size_t>(model.num_classes());
    const std::vector<double> pi(C, 1.0 / static_cast<double>(C));

    std::vector<std::size_t> lorder(nl), uorder(nu);
    std::iota(lorder.begin(), lorder.end(), 0);
    std::iota(uorder.begin(), uorder.end(), 0);
    std::shuffle(lorder.begin(), lorder.end(), rng);
    if (nu > 0) std::shuffle(uorder.begin(), uorder.end(), rng);

    const std::size_t bs = static_cast<std::size_t>(std::max(1, config.batch_size));
    const std::size_t n_steps = (nl + bs - 1) / bs;

    double sum_lx = 0.0, sum_lu = 0.0, sum_lreg = 0.0;
    for (std::size_t step = 0; step < n_steps; ++step) {
        const std::size_t l_begin = step * bs;
        const std::size_t l_end = std::min(nl, l_begin + bs);
        const std::size_t bl = l_end - l_begin;
        const std::size_t u_begin = nu * step / n_steps;
        const std::size_t u_end = nu * (step + 1) / n_steps;
        const std::size_t bu = u_end - u_begin;
        const std::size_t bt = bl + bu;

        Matrix xb(bt, mixed.labeled.features.cols), tb(bt, C);
        std::vector<double> wb(bl);
        for (std::size_t i = 0; i < bl; ++i) {
            const std::size_t src = lorder[l_begin + i];
            std::copy(mixed.labeled.features.row_ptr(src),
                      mixed.labeled.features.row_ptr(src) + xb.cols, xb.row_ptr(i));
            std::copy(mixed.labeled.targets.row_ptr(src),
                      mixed.labeled.targets.row_ptr(src) + C, tb.row_ptr(i));
            wb[i] = mixed.labeled.weights[src];
        }
        for (std::size_t j = 0; j < bu; ++j) {
            const std::size_t src = uorder[u_begin + j];
            std::copy(mixed.unlabeled.features.row_ptr(src),
                      mixed.unlabeled.features.row_ptr(src) + xb.cols, xb.row_ptr(bl + j));
            std::copy(mixed.unlabeled.targets.row_ptr(src),
                      mixed.unlabeled.targets.row_ptr(src) + C, tb.row_ptr(bl + j));
        }

        Mlp::ForwardCache cache = model.forward_cached(xb);
        const Matrix& q = cache.probs;

        // Batch-mean output for the regularization term.
        std::vector<double> chi(C, 0.0);
        for (std::size_t i = 0; i < bt; ++i)
            for (std::size_t c = 0; c < C; ++c) chi[c] += q(i, c);
        for (double& v : chi) v /= static_cast<double>(bt);

        // Pre-update loss values for reporting.
        double lx = 0.0, lu = 0.0, lreg = 0.0;
        for (std::size_t i = 0; i < bl; ++i) {
            if (!(wb[i] > 0.0)) throw usage_error("train_mixed_epoch: labeled weight 0");
            double ce = 0.0;
            for (std::size_t c = 0; c < C; ++c)
                ce -= tb(i, c) * std::log(std::max(q(i, c), kLogFloor));
            lx += ce / std::pow(wb[i], r);
        }
        lx /= static_cast<double>(bl);
        if (bu > 0) {
            for (std::size_t j = 0; j < bu; ++j)
                for (std::size_t c = 0; c < C; ++c) {
                    const double d = tb(bl + j, c) - q(bl + j, c);
                    lu += d * d;
                }
            lu /= static_cast<double>(bu);
        }
        for (std::size_t c = 0; c < C; ++c) lreg += pi[c] * std::log(pi[c] / chi[c]);
        if (!std::isfinite(lx) || !std::isfinite(lu) || !std::isfinite(lreg))
            throw numeric_fault("train_mixed_epoch: non-finite loss");
        sum_lx += lx;
        sum_lu += lu;
        sum_lreg += lreg;

        // Logit gradients.
        Matrix dlogits(bt, C);
        std::vector<double> g(C), jac(C);
        for (std::size_t i = 0; i < bt; ++i) {
            const double* qi = q.row_ptr(i);
            // Regularization gradient flows through every row.
            for (std::size_t c = 0; c < C; ++c)
                g[c] = -lambda_r * pi[c] / (chi[c] * static_cast<double>(bt));
            if (i >= bl && bu > 0) {
                // Unlabeled row: MSE gradient dL_U/dq = 2(q - p)/bu.
                for (std::size_t c = 0; c < C; ++c)
                    g[c] += lambda_u * 2.0 * (qi[c] - tb(i, c)) / static_cast<double>(bu);
            }
            softmax_vjp_row(qi, g.data(), jac.data(), C);
            if (i < bl) {
                const double u = 1.0 / std::pow(wb[i], r);
                for (std::size_t c = 0; c < C; ++c)
                    dlogits(i, c) = u * (qi[c] - tb(i, c)) / static_cast<double>(bl) + jac[c];
            } else {
                for (std::size_t c = 0; c < C; ++c) dlogits(i, c) = jac[c];
            }
        }
        model.sgd_step(model.backward(cache, dlogits), config);
    }

    LossBreakdown out;
    out.loss_x = sum_lx / static_cast<double>(n_steps);
    out.loss_u = sum_lu / static_cast<double>(n_steps);
    out.loss_reg = sum_lreg / static_cast<double>(n_steps);
    out.lambda_u = lambda_u;
    out.lambda_r = lambda_r;
    out.total = total_loss(out.loss_x, out.loss_u, out.loss_reg, lambda_u, lambda_r);
    return out;
}

namespace {

struct DivideQuality {
    double easy_purity = 1.0;
    double noisy_precision = 1.0;
    double noisy_recall = 1.0;
};

DivideQuality divide_quality(const DividedSets& sets, const FlipMask& flips) {
    DivideQuality q;
    if (!sets.easy_ids.empty()) {
        std::size_t clean = 0;
        for (int id : sets.easy_ids)
            if (!flips.flipped[static_cast<std::size_t>(id)]) ++clean;
        q.easy_purity = static_cast<double>(clean) / static_cast<double>(sets.easy_ids.size());
    }
    const std::size_t total_flipped = flips.count();
    std::size_t caught = 0;
    for (int id : sets.noisy_ids)
        if (flips.flipped[static_cast<std::size_t>(id)]) ++caught;
    if (!sets.noisy_ids.empty())
        q.noisy_precision =
            static_cast<double>(caught) / static_cast<double>(sets.noisy_ids.size());
    if (total_flipped > 0)
        q.noisy_recall = static_cast<double>(caught) / static_cast<double>(total_flipped);
    return q;
}

double ensemble_accuracy(const Mlp& a, const Mlp& b, const Matrix& X,
                         const std::vector<int>& labels, bool two_networks) {
    if (X.rows == 0) return 0.0;
    Matrix probs = a.forward(X);
    if (two_networks) {
        const Matrix pb = b.forward(X);
        for (std::size_t i = 0; i < probs.data.size(); ++i)
            probs.data[i] = 0.5 * (probs.data[i] + pb.data[i]);
    }
    std::size_t hit = 0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const double* row = probs.row_ptr(i);
        const int pred = static_cast<int>(std::max_element(row, row + probs.cols) - row);
        if (pred == labels[i]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(probs.rows);
}

std::vector<int> true_labels_of(const LabeledDataset& ds) {
    std::vector<int> y(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        y[i] = ds.samples[i].true_label ? *ds.samples[i].true_label : ds.samples[i].observed_label;
    return y;
}

} // namespace

PgdfResult train_pgdf(const LabeledDataset& train, const LabeledDataset& test,
                      const PgdfConfig& config, const TrainConfig& trainer,
                      const MetricsSink& sink) {
    if (train.samples.empty()) throw config_error("train_pgdf: empty training set");
    if (config.warm_up < 0 || config.epochs < config.warm_up)
        throw config_error("train_pgdf: need 0 <= warm_up <= epochs");
    if (config.tau < 0.0 || config.tau >= 1.0) throw config_error("train_pgdf: tau in [0,1)");

    const double tau_e = config.effective_tau_e();
    const double tau_n1 = config.effective_tau_n1();
    const double r_eff = config.effective_r();
    const int C = train.num_classes;

    const Matrix X = train.feature_matrix();
    const Matrix Y = train.observed_one_hot();
    const std::vector<int> observed = train.observed_labels();
    const Matrix X_test = test.samples.empty() ? Matrix() : test.feature_matrix();
    const std::vector<int> y_test = test.samples.empty() ? std::vector<int>() : true_labels_of(test);

    std::optional<FlipMask> flips;
    if (train.has_true_labels()) {
        FlipMask fm;
        fm.flipped.resize(train.size());
        for (std::size_t i = 0; i < train.size(); ++i)
            fm.flipped[i] = train.samples[i].observed_label != *train.samples[i].true_label;
        flips = std::move(fm);
    }

    std::vector<double> jitter_sigma(train.feature_dim, 0.0);
    if (config.jitter > 0.0) {
        const std::vector<double> sd = train.feature_std();
        for (int f = 0; f < train.feature_dim; ++f) jitter_sigma[f] = config.jitter * sd[f];
    }

    PgdfResult result;

    // Prior generation (once, before the main loop).
    std::vector<double> w_prior;
    auto run_prior = [&](std::uint64_t s) {
        TrainConfig prior_trainer = trainer;
        prior_trainer.epochs = config.prior_history_epochs;
        result.prior = generate_prior(train, config.hidden, prior_trainer, config.prior,
                                      config.tau, tau_e, tau_n1, s);
        w_prior = prior_clean_prob(result.prior->partition);
    };
    if (config.use_prior) run_prior(derive_seed(config.seed, 100));

    // Networks.
    std::vector<int> sizes;
    sizes.push_back(train.feature_dim);
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(C);
    const int n_nets = config.two_networks ? 2 : 1;
    std::vector<Mlp> nets;
    std::vector<Rng> rngs;
    for (int i = 0; i < n_nets; ++i) {
        nets.emplace_back(sizes, derive_seed(config.seed, 1 + static_cast<std::uint64_t>(i)));
        rngs.emplace_back(make_rng(derive_seed(config.seed, 21 + static_cast<std::uint64_t>(i))));
    }
    const char* net_names[2] = {"a", "b"};

    auto emit = [&](const nlohmann::ordered_json& j) {
        if (sink) sink(j.dump());
    };

    // Independent warm-up.
    for (int i = 0; i < n_nets; ++i) {
        TrainConfig wc = trainer;
        wc.epochs = config.warm_up;
        wc.seed = derive_seed(config.seed, 31 + static_cast<std::uint64_t>(i));
        warmup_train(nets[i], train, wc, [&](int epoch, const std::vector<double>& probs) {
            double loss = 0.0;
            for (double p : probs) loss -= std::log(std::max(p, kLogFloor));
            loss /= static_cast<double>(probs.size());
            nlohmann::ordered_json j;
            j["epoch"] = epoch;
            j["net"] = net_names[i];
            j["phase"] = "warmup";
            j["train_loss"] = loss;
            if (!y_test.empty()) j["test_acc"] = accuracy_against(nets[i], X_test, y_test);
            emit(j);
        });
    }

    // Main loop.
    const int pgdf_epochs = config.epochs - config.warm_up;
    std::vector<std::vector<double>> w_loss_cache(n_nets);
    std::vector<bool> gmm_degenerate(n_nets, false);

    for (int ep = 0; ep < pgdf_epochs; ++ep) {
        const int global_epoch = config.warm_up + ep;
        if (config.use_prior && config.prior_refresh_every > 0 && ep > 0 &&
            ep % config.prior_refresh_every == 0)
            run_prior(derive_seed(config.seed, 100 + static_cast<std::uint64_t>(ep)));

        const double ramp = config.rampup_epochs <= 0
                                ? 1.0
                                : std::min(1.0, static_cast<double>(ep) /
                                                    static_cast<double>(config.rampup_epochs));
        const double lambda_u_e = config.lambda_u * ramp;

        // Each network divides the dataset; its peer consumes the division.
        std::vector<DividedSets> divisions(n_nets);
        for (int i = 0; i < n_nets; ++i) {
            if (w_loss_cache[i].empty() || ep % std::max(1, config.refit_every) == 0) {
                const std::vector<double> losses = eval_losses(nets[i], X, Y);
                gmm_degenerate[i] = false;
                try {
                    const GmmModel gmm = fit_em(losses, config.gmm_max_iter, config.gmm_tol);
                    w_loss_cache[i] = posterior_clean(losses, gmm);
                } catch (const degenerate_error&) {
                    // No separation evidence; treat every sample as clean.
                    w_loss_cache[i].assign(train.size(), 1.0);
                    gmm_degenerate[i] = true;
                }
            }
            if (config.use_prior) {
                const double m_eff = config.use_gmm ? config.m : 0.0;
                const CleanProbabilities cp =
                    fuse(w_loss_cache[i], w_prior, result.prior->partition, m_eff);
                divisions[i] = assign_sets(cp);
            } else {
                divisions[i] =
                    assign_sets_threshold(w_loss_cache[i], config.no_prior_easy_threshold);
            }
        }

        for (int consumer = 0; consumer < n_nets; ++consumer) {
            const int divider = config.two_networks ? 1 - consumer : consumer;
            const DividedSets& sets = divisions[divider];
            if (sets.easy_ids.empty() && sets.hard_ids.empty())
                throw degenerate_error("train_pgdf: epoch " + std::to_string(global_epoch) +
                                       " net " + net_names[consumer] + ": empty labeled set");

            try {
                const Mlp& peer_a = nets[0];
                const Mlp& peer_b = config.two_networks ? nets[1] : nets[0];

                // Pseudo-labels for hard + noisy samples.
                std::vector<int> pseudo_ids = sets.hard_ids;
                pseudo_ids.insert(pseudo_ids.end(), sets.noisy_ids.begin(), sets.noisy_ids.end());
                std::sort(pseudo_ids.begin(), pseudo_ids.end());

                Matrix refined_full(train.size(), static_cast<std::size_t>(C));
                TransitionMatrix tmat;
                bool have_t = false;
                RefineResult refine_info;
                if (!pseudo_ids.empty()) {
                    const Matrix Xp = train.feature_matrix(pseudo_ids);
                    Matrix P = co_guess(peer_a, peer_b, Xp, jitter_sigma, config.n_aug,
                                        config.temperature, rngs[consumer]);
                    if (config.use_refine) {
                        // Plain averaged softmax on the easy set estimates T.
                        const Matrix Xe = train.feature_matrix(sets.easy_ids);
                        Matrix probs_easy = peer_a.forward(Xe);
                        if (config.two_networks) {
                            const Matrix pb = peer_b.forward(Xe);
                            for (std::size_t k = 0; k < probs_easy.data.size(); ++k)
                                probs_easy.data[k] = 0.5 * (probs_easy.data[k] + pb.data[k]);
                        }
                        std::vector<int> easy_labels(sets.easy_ids.size());
                        for (std::size_t k = 0; k < sets.easy_ids.size(); ++k)
                            easy_labels[k] =
                                observed[static_cast<std::size_t>(sets.easy_ids[k])];
                        tmat = estimate_transition(probs_easy, easy_labels, C);
                        have_t = true;
                        refine_info = refine_pseudo(P, tmat, config.ridge_epsilon);
                        P = refine_info.refined;
                    }
                    for (std::size_t k = 0; k < pseudo_ids.size(); ++k)
                        std::copy(P.row_ptr(k), P.row_ptr(k) + P.cols,
                                  refined_full.row_ptr(static_cast<std::size_t>(pseudo_ids[k])));
                }

                const Matrix targets = relabel(sets, refined_full, Y);

                std::vector<int> labeled_ids = sets.easy_ids;
                labeled_ids.insert(labeled_ids.end(), sets.hard_ids.begin(), sets.hard_ids.end());
                std::sort(labeled_ids.begin(), labeled_ids.end());
                Matrix Lx = train.feature_matrix(labeled_ids);
                Matrix Lt(labeled_ids.size(), static_cast<std::size_t>(C));
                std::vector<double> Lw(labeled_ids.size());
                for (std::size_t k = 0; k < labeled_ids.size(); ++k) {
                    const std::size_t id = static_cast<std::size_t>(labeled_ids[k]);
                    std::copy(targets.row_ptr(id), targets.row_ptr(id) + targets.cols,
                              Lt.row_ptr(k));
                    Lw[k] = sets.w[id];
                }
                Matrix Ux = train.feature_matrix(sets.noisy_ids);
                Matrix Ut(sets.noisy_ids.size(), static_cast<std::size_t>(C));
                for (std::size_t k = 0; k < sets.noisy_ids.size(); ++k) {
                    const std::size_t id = static_cast<std::size_t>(sets.noisy_ids[k]);
                    std::copy(targets.row_ptr(id), targets.row_ptr(id) + targets.cols,
                              Ut.row_ptr(k));
                }

                const MixResult mixed =
                    mix(Lx, Lt, Lw, Ux, Ut, config.alpha, rngs[consumer]);
                const LossBreakdown losses = train_mixed_epoch(
                    nets[consumer], mixed, r_eff, lambda_u_e, config.lambda_r, trainer,
                    rngs[consumer]);

                nlohmann::ordered_json j;
                j["epoch"] = global_epoch;
                j["net"] = net_names[consumer];
                j["phase"] = "pgdf";
                j["loss_x"] = losses.loss_x;
                j["loss_u"] = losses.loss_u;
                j["loss_reg"] = losses.loss_reg;
                j["loss_total"] = losses.total;
                j["lambda_u"] = losses.lambda_u;
                j["n_easy"] = sets.easy_ids.size();
                j["n_hard"] = sets.hard_ids.size();
                j["n_noisy"] = sets.noisy_ids.size();
                if (flips) {
                    const DivideQuality q = divide_quality(sets, *flips);
                    j["easy_purity"] = q.easy_purity;
                    j["noisy_precision"] = q.noisy_precision;
                    j["noisy_recall"] = q.noisy_recall;
                }
                if (!y_test.empty())
                    j["test_acc"] = accuracy_against(nets[consumer], X_test, y_test);
                if (have_t) {
                    j["t_cond"] = std::isfinite(tmat.condition_number)
                                      ? tmat.condition_number
                                      : -1.0;
                    j["t_matrix"] = tmat.T.data;
                }
                nlohmann::ordered_json flags = nlohmann::ordered_json::array();
                if (gmm_degenerate[divider]) flags.push_back("gmm_degenerate");
                if (have_t && !tmat.identity_rows.empty()) flags.push_back("t_identity_rows");
                if (have_t && refine_info.ridge_used) flags.push_back("t_ridge");
                if (have_t && !refine_info.replaced_rows.empty())
                    flags.push_back("refine_replaced_rows");
                j["flags"] = flags;
                emit(j);
            } catch (const numeric_fault& e) {
                throw numeric_fault("epoch " + std::to_string(global_epoch) + " net " +
                                    net_names[consumer] + ": " + e.what());
            }

            if (ep == pgdf_epochs - 1 && divider == 0) result.last_divided_a = sets;
        }
    }

    if (!y_test.empty()) {
        result.final_test_accuracy_a = accuracy_against(nets[0], X_test, y_test);
        result.final_test_accuracy_b =
            config.two_networks ? accuracy_against(nets[1], X_test, y_test)
                                : result.final_test_accuracy_a;
        result.final_test_accuracy =
            ensemble_accuracy(nets[0], config.two_networks ? nets[1] : nets[0], X_test, y_test,
                              config.two_networks);
    }
    result.net_a = std::move(nets[0]);
    result.net_b = config.two_networks ? std::move(nets[1]) : result.net_a;
    return result;
}

double train_ce_baseline(const LabeledDataset& train, const LabeledDataset& test,
                         const PgdfConfig& config, const TrainConfig& trainer,
                         const MetricsSink& sink) {
    std::vector<int> sizes;
    sizes.push_back(train.feature_dim);
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(train.num_classes);
    Mlp model(sizes, derive_seed(config.seed, 1));

    const Matrix X_test = test.samples.empty() ? Matrix() : test.feature_matrix();
    const std::vector<int> y_test = test.samples.empty() ? std::vector<int>() : true_labels_of(test);

    TrainConfig cfg = trainer;
    cfg.epochs = config.epochs;
    cfg.seed = derive_seed(config.seed, 31);
    warmup_train(model, train, cfg, [&](int epoch, const std::vector<double>& probs) {
        if (!sink) return;
        double loss = 0.0;
        for (double p : probs) loss -= std::log(std::max(p, kLogFloor));
        loss /= static_cast<double>(probs.size());
        nlohmann::ordered_json j;
        j["epoch"] = epoch;
        j["net"] = "ce";
        j["phase"] = "baseline";
        j["train_loss"] = loss;
        if (!y_test.empty()) j["test_acc"] = accuracy_against(model, X_test, y_test);
        sink(j.dump());
    });
    return y_test.empty() ? 0.0 : accuracy_against(model, X_test, y_test);
}

} // namespace pgdf
