#include "pgdf/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "pgdf/errors.hpp"

#include "json.hpp"

namespace pgdf {

void ProbabilityHistory::record(int epoch_index, const std::vector<double>& per_sample_probs) {
    if (epoch_index != static_cast<int>(columns_.size()))
        throw usage_error("ProbabilityHistory::record: epoch " + std::to_string(epoch_index) +
                          " out of order (next is " + std::to_string(columns_.size()) + ")");
    if (per_sample_probs.size() != num_samples_)
        throw shape_error("ProbabilityHistory::record: expected " + std::to_string(num_samples_) +
                          " probabilities");
    for (double p : per_sample_probs)
        if (!(p >= 0.0 && p <= 1.0))
            throw usage_error("ProbabilityHistory::record: probability outside [0,1]");
    columns_.push_back(per_sample_probs);
}

std::vector<double> ProbabilityHistory::row(std::size_t sample) const {
    std::vector<double> r(columns_.size());
    for (std::size_t e = 0; e < columns_.size(); ++e) r[e] = columns_[e][sample];
    return r;
}

MeanHistory mean_history(const ProbabilityHistory& history) {
    if (history.epochs() == 0) throw usage_error("mean_history: no epochs recorded");
    MeanHistory means(history.num_samples(), 0.0);
    for (std::size_t i = 0; i < history.num_samples(); ++i) {
        double acc = 0.0;
        for (std::size_t e = 0; e < history.epochs(); ++e) acc += history.at(i, e);
        means[i] = acc / static_cast<double>(history.epochs());
    }
    return means;
}

QuantileSelection select_by_quantile(const MeanHistory& means, double tau_e, double tau_n1) {
    if (tau_e < 0.0 || tau_n1 < 0.0 || tau_e + tau_n1 > 1.0 + 1e-12)
        throw config_error("select_by_quantile: need tau_e, tau_n1 >= 0 and tau_e + tau_n1 <= 1");
    const std::size_t n = means.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (means[a] != means[b]) return means[a] > means[b];
        return a < b;
    });
    const std::size_t n_easy = static_cast<std::size_t>(std::floor(n * tau_e + 1e-9));
    const std::size_t n_noisy = static_cast<std::size_t>(std::floor(n * tau_n1 + 1e-9));

    QuantileSelection sel;
    sel.easy_ids.assign(order.begin(), order.begin() + n_easy);
    sel.noisy_ids.assign(order.end() - n_noisy, order.end());
    sel.middle_ids.assign(order.begin() + n_easy, order.end() - n_noisy);
    std::sort(sel.easy_ids.begin(), sel.easy_ids.end());
    std::sort(sel.noisy_ids.begin(), sel.noisy_ids.end());
    std::sort(sel.middle_ids.begin(), sel.middle_ids.end());
    return sel;
}

namespace {

void accumulate_stats(const std::vector<double>& values, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (values.empty()) return;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() < 2) return;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    sd = std::sqrt(var / static_cast<double>(values.size() - 1));
}

} // namespace

SeparationReport separation_report(const MeanHistory& means, const FlipMask& flip_mask) {
    if (flip_mask.flipped.size() != means.size())
        throw shape_error("separation_report: flip mask length mismatch");

    constexpr std::size_t kBins = 50;
    SeparationReport rep;
    rep.hist_clean.assign(kBins, 0);
    rep.hist_noisy.assign(kBins, 0);

    std::vector<double> clean, noisy;
    for (std::size_t i = 0; i < means.size(); ++i) {
        const std::size_t bin =
            std::min<std::size_t>(kBins - 1, static_cast<std::size_t>(means[i] * kBins));
        if (flip_mask.flipped[i]) {
            noisy.push_back(means[i]);
            ++rep.hist_noisy[bin];
        } else {
            clean.push_back(means[i]);
            ++rep.hist_clean[bin];
        }
    }
    rep.n_clean = clean.size();
    rep.n_noisy = noisy.size();
    accumulate_stats(clean, rep.mean_clean, rep.std_clean);
    accumulate_stats(noisy, rep.mean_noisy, rep.std_noisy);
    if (rep.n_clean + rep.n_noisy >= 3 && rep.n_clean >= 1 && rep.n_noisy >= 1) {
        const double num = (rep.n_clean > 1 ? (rep.n_clean - 1) * rep.std_clean * rep.std_clean : 0.0) +
                           (rep.n_noisy > 1 ? (rep.n_noisy - 1) * rep.std_noisy * rep.std_noisy : 0.0);
        rep.pooled_std = std::sqrt(num / static_cast<double>(rep.n_clean + rep.n_noisy - 2));
    }
    return rep;
}

std::string SeparationReport::to_json() const {
    nlohmann::ordered_json j;
    j["mean_clean"] = mean_clean;
    j["mean_noisy"] = mean_noisy;
    j["std_clean"] = std_clean;
    j["std_noisy"] = std_noisy;
    j["pooled_std"] = pooled_std;
    j["n_clean"] = n_clean;
    j["n_noisy"] = n_noisy;
    j["hist_clean"] = hist_clean;
    j["hist_noisy"] = hist_noisy;
    return j.dump(2);
}

void save_history_csv(const ProbabilityHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ingestion_error("save_history_csv: cannot open " + path);
    out << "id";
    for (std::size_t e = 0; e < history.epochs(); ++e) out << ",h_" << (e + 1);
    out << "\n";
    char buf[40];
    for (std::size_t i = 0; i < history.num_samples(); ++i) {
        out << i;
        for (std::size_t e = 0; e < history.epochs(); ++e) {
            std::snprintf(buf, sizeof(buf), "%.17g", history.at(i, e));
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) throw ingestion_error("save_history_csv: write failed for " + path);
}

} // namespace pgdf
