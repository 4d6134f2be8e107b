#pragma once

#include <cstdint>
#include <vector>

namespace pgdf {

/// Two-component 1-D Gaussian mixture over min-max-normalized losses.
/// Component 0 always has the smaller mean (the "clean" component).
struct GmmModel {
    double mean[2] = {0.0, 0.0};
    double variance[2] = {1.0, 1.0};
    double weight[2] = {0.5, 0.5};
    // Normalization applied to the raw losses before fitting; posterior
    // queries reuse it so raw losses can be passed everywhere.
    double loss_min = 0.0;
    double loss_max = 1.0;
    // Log-likelihood after each EM iteration; non-decreasing by construction.
    std::vector<double> loglik_trace;
    int iterations = 0;
};

/// EM fit. Initialization is deterministic: means at the 10th and 90th
/// percentiles of the normalized losses, shared sample variance, weights
/// 0.5/0.5. Throws degenerate_error when all losses are (nearly) identical.
GmmModel fit_em(const std::vector<double>& losses, int max_iter = 100, double tol = 1e-6);

/// Posterior responsibility of the smaller-mean component at each raw loss.
std::vector<double> posterior_clean(const std::vector<double>& losses, const GmmModel& model);

} // namespace pgdf
