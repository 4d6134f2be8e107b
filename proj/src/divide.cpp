#include "pgdf/divide.hpp"

#include <cstdio>
#include <fstream>

#include "pgdf/errors.hpp"

namespace pgdf {

std::vector<double> prior_clean_prob(const PriorPartition& partition) {
    std::vector<double> w(partition.num_samples, 0.0);
    for (int id : partition.easy_ids) w[static_cast<std::size_t>(id)] = 1.0;
    for (int id : partition.noisy_direct_ids) w[static_cast<std::size_t>(id)] = 0.0;
    for (std::size_t i = 0; i < partition.middle_ids.size(); ++i) {
        const std::size_t id = static_cast<std::size_t>(partition.middle_ids[i]);
        // Same value either way: p_h for hard members, 1 - p_n for classified
        // noisy; the two coincide because p_h + p_n = 1.
        w[id] = partition.p_hard[i];
    }
    return w;
}

CleanProbabilities fuse(const std::vector<double>& w_loss, const std::vector<double>& w_prior,
                        const PriorPartition& partition, double m) {
    if (m < 0.0 || m > 1.0) throw config_error("fuse: m must be in [0,1]");
    if (w_loss.size() != partition.num_samples || w_prior.size() != partition.num_samples)
        throw shape_error("fuse: probability vectors must cover all samples");

    CleanProbabilities out;
    out.m = m;
    out.w_loss = w_loss;
    out.w_prior = w_prior;
    out.w.resize(partition.num_samples);
    out.prior_easy.assign(partition.num_samples, false);
    for (int id : partition.easy_ids) out.prior_easy[static_cast<std::size_t>(id)] = true;
    for (std::size_t i = 0; i < partition.num_samples; ++i)
        out.w[i] = out.prior_easy[i] ? 1.0 : m * w_loss[i] + (1.0 - m) * w_prior[i];
    return out;
}

DividedSets assign_sets(const CleanProbabilities& probs) {
    DividedSets sets;
    sets.w = probs.w;
    for (std::size_t i = 0; i < probs.w.size(); ++i) {
        if (probs.prior_easy[i])
            sets.easy_ids.push_back(static_cast<int>(i));
        else if (probs.w[i] > 0.5)
            sets.hard_ids.push_back(static_cast<int>(i));
        else
            sets.noisy_ids.push_back(static_cast<int>(i));
    }
    return sets;
}

DividedSets assign_sets_threshold(const std::vector<double>& w, double easy_threshold) {
    if (easy_threshold <= 0.5 || easy_threshold > 1.0)
        throw config_error("assign_sets_threshold: threshold must be in (0.5, 1]");
    DividedSets sets;
    sets.w = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] >= easy_threshold)
            sets.easy_ids.push_back(static_cast<int>(i));
        else if (w[i] > 0.5)
            sets.hard_ids.push_back(static_cast<int>(i));
        else
            sets.noisy_ids.push_back(static_cast<int>(i));
    }
    return sets;
}

void save_divide_csv(const CleanProbabilities& probs, const DividedSets& sets,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ingestion_error("save_divide_csv: cannot open " + path);
    std::vector<char> tag(probs.w.size(), 'n');
    for (int id : sets.easy_ids) tag[static_cast<std::size_t>(id)] = 'e';
    for (int id : sets.hard_ids) tag[static_cast<std::size_t>(id)] = 'h';
    out << "id,w_ip,w_it,w_i,set\n";
    char buf[128];
    for (std::size_t i = 0; i < probs.w.size(); ++i) {
        const char* name = tag[i] == 'e' ? "easy" : tag[i] == 'h' ? "hard" : "noisy";
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%s", i, probs.w_prior[i],
                      probs.w_loss[i], probs.w[i], name);
        out << buf << "\n";
    }
}

} // namespace pgdf
