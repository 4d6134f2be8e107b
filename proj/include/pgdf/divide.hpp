#pragma once

#include <string>
#include <vector>

#include "pgdf/prior.hpp"

namespace pgdf {

/// Per-sample clean probabilities: the prior term, the loss-posterior term,
/// and their fusion. prior_easy marks samples pinned to 1 by the prior branch
/// rather than by arithmetic.
struct CleanProbabilities {
    std::vector<double> w_prior; // w_ip
    std::vector<double> w_loss;  // w_it
    std::vector<double> w;       // fused w_i
    double m = 0.5;
    std::vector<bool> prior_easy;
};

struct DividedSets {
    std::vector<int> easy_ids;
    std::vector<int> hard_ids;
    std::vector<int> noisy_ids;
    std::vector<double> w; // fused clean probability per sample
};

/// Piecewise prior clean probability: 1 on the easy set, p_h on the hard set,
/// 1-p_n on the classified-noisy set, 0 on the direct-noisy set.
std::vector<double> prior_clean_prob(const PriorPartition& partition);

/// w_i = 1 on the prior-easy set (branch, not arithmetic), otherwise
/// m*w_it + (1-m)*w_ip.
CleanProbabilities fuse(const std::vector<double>& w_loss, const std::vector<double>& w_prior,
                        const PriorPartition& partition, double m);

/// Easy = prior-easy branch; hard = w > 0.5 otherwise; noisy = w <= 0.5.
DividedSets assign_sets(const CleanProbabilities& probs);

/// Loss-only dividing used when the prior is disabled: easy = w >= threshold,
/// hard = 0.5 < w < threshold, noisy = w <= 0.5.
DividedSets assign_sets_threshold(const std::vector<double>& w, double easy_threshold);

/// Optional per-epoch dump: id,w_ip,w_it,w_i,set
void save_divide_csv(const CleanProbabilities& probs, const DividedSets& sets,
                     const std::string& path);

} // namespace pgdf
