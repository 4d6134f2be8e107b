#pragma once

#include <vector>

#include "pgdf/classifier.hpp"
#include "pgdf/divide.hpp"
#include "pgdf/matrix.hpp"

namespace pgdf {

/// Row-stochastic class transition matrix estimated from the easy set.
struct TransitionMatrix {
    Matrix T; // C x C, row i = mean softmax over easy samples labeled i
    double condition_number = 0.0;
    std::vector<int> identity_rows; // classes absent from the easy set
};

/// T[i][j] = mean over easy samples labeled i of softmax probability j.
/// Classes missing from the easy set fall back to an identity row.
TransitionMatrix estimate_transition(const Matrix& probs_easy, const std::vector<int>& labels_easy,
                                     int num_classes);

struct RefineResult {
    Matrix refined;
    bool ridge_used = false;
    std::vector<std::size_t> replaced_rows; // rows that collapsed to zero after clamping
};

/// Applies the inverse transition to each pseudo-label row, clamps negatives
/// to zero, and renormalizes rows. A ridge-regularized inverse (T + eps*I)
/// substitutes when T is singular or its condition number exceeds
/// cond_threshold; rows that clamp to all-zero fall back to the unrefined row.
RefineResult refine_pseudo(const Matrix& P, const TransitionMatrix& T, double ridge_epsilon = 1e-3,
                           double cond_threshold = 1e8);

/// Temperature-sharpened average of the two models' softmax outputs over
/// n_aug jittered copies of each sample. jitter_sigma is per-feature; pass
/// all zeros (or n_aug <= 1 and sigma 0) for plain averaging.
Matrix co_guess(const Mlp& model_a, const Mlp& model_b, const Matrix& X,
                const std::vector<double>& jitter_sigma, int n_aug, double temperature, Rng& rng);

/// Eq-style convex combination w*y + (1-w)*p.
std::vector<double> combine_label(const std::vector<double>& one_hot,
                                  const std::vector<double>& pseudo, double w);

/// Per-sample training targets: easy rows keep the observed one-hot, hard
/// rows blend it with the refined pseudo-label by w_i, noisy rows take the
/// refined pseudo-label. `refined` must hold valid rows for hard and noisy ids.
Matrix relabel(const DividedSets& sets, const Matrix& refined, const Matrix& observed_one_hot);

// Small dense helpers shared by the transition math.
Matrix matmul(const Matrix& A, const Matrix& B);
/// Gauss-Jordan inverse with partial pivoting; false when singular.
bool invert_matrix(const Matrix& A, Matrix& inverse);
/// 1-norm condition number; +inf when singular.
double condition_number_1(const Matrix& A);

} // namespace pgdf
