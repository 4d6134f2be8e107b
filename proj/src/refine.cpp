#include "pgdf/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pgdf/errors.hpp"

namespace pgdf {

Matrix matmul(const Matrix& A, const Matrix& B) {
    if (A.cols != B.rows) throw shape_error("matmul: inner dimensions disagree");
    Matrix C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < B.cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < A.cols; ++k) acc += A(i, k) * B(k, j);
            C(i, j) = acc;
        }
    return C;
}

bool invert_matrix(const Matrix& A, Matrix& inverse) {
    if (A.rows != A.cols) throw shape_error("invert_matrix: matrix must be square");
    const std::size_t n = A.rows;
    Matrix work = A;
    inverse = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) inverse(i, i) = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
        if (std::abs(work(pivot, col)) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(work(pivot, c), work(col, c));
                std::swap(inverse(pivot, c), inverse(col, c));
            }
        }
        const double inv_p = 1.0 / work(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            work(col, c) *= inv_p;
            inverse(col, c) *= inv_p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = work(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                work(r, c) -= f * work(col, c);
                inverse(r, c) -= f * inverse(col, c);
            }
        }
    }
    return true;
}

namespace {
double norm_1(const Matrix& A) {
    double best = 0.0;
    for (std::size_t j = 0; j < A.cols; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < A.rows; ++i) col += std::abs(A(i, j));
        best = std::max(best, col);
    }
    return best;
}
} // namespace

double condition_number_1(const Matrix& A) {
    Matrix inv;
    if (!invert_matrix(A, inv)) return std::numeric_limits<double>::infinity();
    return norm_1(A) * norm_1(inv);
}

TransitionMatrix estimate_transition(const Matrix& probs_easy, const std::vector<int>& labels_easy,
                                     int num_classes) {
    if (probs_easy.rows != labels_easy.size())
        throw shape_error("estimate_transition: rows and labels disagree");
    if (static_cast<int>(probs_easy.cols) != num_classes && probs_easy.rows > 0)
        throw shape_error("estimate_transition: probability width != C");

    TransitionMatrix result;
    result.T = Matrix(num_classes, num_classes);
    std::vector<std::size_t> counts(num_classes, 0);
    for (std::size_t i = 0; i < probs_easy.rows; ++i) {
        const int label = labels_easy[i];
        if (label < 0 || label >= num_classes)
            throw shape_error("estimate_transition: label out of range");
        ++counts[static_cast<std::size_t>(label)];
        for (int c = 0; c < num_classes; ++c)
            result.T(label, c) += probs_easy(i, c);
    }
    for (int i = 0; i < num_classes; ++i) {
        if (counts[static_cast<std::size_t>(i)] == 0) {
            result.T(i, i) = 1.0;
            result.identity_rows.push_back(i);
        } else {
            const double inv = 1.0 / static_cast<double>(counts[static_cast<std::size_t>(i)]);
            for (int c = 0; c < num_classes; ++c) result.T(i, c) *= inv;
        }
    }
    result.condition_number = condition_number_1(result.T);
    return result;
}

RefineResult refine_pseudo(const Matrix& P, const TransitionMatrix& T, double ridge_epsilon,
                           double cond_threshold) {
    const std::size_t C = T.T.rows;
    if (P.rows > 0 && P.cols != C) throw shape_error("refine_pseudo: P width != C");

    Matrix inverse;
    bool ok = std::isfinite(T.condition_number) && T.condition_number <= cond_threshold &&
              invert_matrix(T.T, inverse);
    RefineResult result;
    if (!ok) {
        Matrix ridged = T.T;
        for (std::size_t i = 0; i < C; ++i) ridged(i, i) += ridge_epsilon;
        if (!invert_matrix(ridged, inverse))
            throw numeric_fault("refine_pseudo: ridge-regularized transition still singular");
        result.ridge_used = true;
    }

    result.refined = matmul(P, inverse);
    for (std::size_t i = 0; i < result.refined.rows; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            double& v = result.refined(i, c);
            v = std::max(v, 0.0);
            sum += v;
        }
        if (sum <= 0.0) {
            // No mass survived the clamp; keep the unrefined row.
            for (std::size_t c = 0; c < C; ++c) result.refined(i, c) = P(i, c);
            result.replaced_rows.push_back(i);
            continue;
        }
        for (std::size_t c = 0; c < C; ++c) result.refined(i, c) /= sum;
    }
    return result;
}

Matrix co_guess(const Mlp& model_a, const Mlp& model_b, const Matrix& X,
                const std::vector<double>& jitter_sigma, int n_aug, double temperature,
                Rng& rng) {
    if (n_aug < 1) throw config_error("co_guess: n_aug must be >= 1");
    if (temperature <= 0.0) throw config_error("co_guess: temperature must be > 0");
    if (jitter_sigma.size() != X.cols) throw shape_error("co_guess: jitter sigma width");

    Matrix sum(X.rows, static_cast<std::size_t>(model_a.num_classes()));
    std::normal_distribution<double> unit(0.0, 1.0);
    int views = 0;
    for (int aug = 0; aug < n_aug; ++aug) {
        Matrix xt = X;
        bool any_jitter = false;
        for (double s : jitter_sigma) any_jitter = any_jitter || s != 0.0;
        if (any_jitter) {
            for (std::size_t i = 0; i < xt.rows; ++i)
                for (std::size_t f = 0; f < xt.cols; ++f)
                    xt(i, f) += jitter_sigma[f] * unit(rng);
        }
        const Matrix pa = model_a.forward(xt);
        const Matrix pb = model_b.forward(xt);
        for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += pa.data[i] + pb.data[i];
        views += 2;
    }
    const double inv_views = 1.0 / static_cast<double>(views);
    for (double& v : sum.data) v *= inv_views;

    // Temperature sharpening: p^(1/T) renormalized. T = 1 leaves rows as-is.
    if (temperature != 1.0) {
        const double power = 1.0 / temperature;
        for (std::size_t i = 0; i < sum.rows; ++i) {
            double total = 0.0;
            for (std::size_t c = 0; c < sum.cols; ++c) {
                double& v = sum(i, c);
                v = std::pow(v, power);
                total += v;
            }
            for (std::size_t c = 0; c < sum.cols; ++c) sum(i, c) /= total;
        }
    }
    return sum;
}

std::vector<double> combine_label(const std::vector<double>& one_hot,
                                  const std::vector<double>& pseudo, double w) {
    if (one_hot.size() != pseudo.size()) throw shape_error("combine_label: vector lengths");
    if (w < 0.0 || w > 1.0) throw usage_error("combine_label: w must be in [0,1]");
    std::vector<double> out(one_hot.size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = w * one_hot[c] + (1.0 - w) * pseudo[c];
    return out;
}

Matrix relabel(const DividedSets& sets, const Matrix& refined, const Matrix& observed_one_hot) {
    Matrix targets = observed_one_hot; // easy rows keep the observed label
    for (int id : sets.hard_ids) {
        const std::size_t i = static_cast<std::size_t>(id);
        const double w = sets.w[i];
        for (std::size_t c = 0; c < targets.cols; ++c)
            targets(i, c) = w * observed_one_hot(i, c) + (1.0 - w) * refined(i, c);
    }
    for (int id : sets.noisy_ids) {
        const std::size_t i = static_cast<std::size_t>(id);
        for (std::size_t c = 0; c < targets.cols; ++c) targets(i, c) = refined(i, c);
    }
    return targets;
}

} // namespace pgdf
