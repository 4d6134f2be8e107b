#include "pgdf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pgdf/classifier.hpp"
#include "pgdf/errors.hpp"

namespace pgdf {

namespace {

// floor(n * frac) robust to the fp representation of frac (1/3, 0.3, ...).
std::size_t quantile_count(std::size_t n, double frac) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 1e-9));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

bool LabeledDataset::has_true_labels() const {
    return !samples.empty() &&
           std::all_of(samples.begin(), samples.end(),
                       [](const Sample& s) { return s.true_label.has_value(); });
}

Matrix LabeledDataset::feature_matrix() const {
    Matrix X(samples.size(), feature_dim);
    for (std::size_t i = 0; i < samples.size(); ++i)
        std::copy(samples[i].features.begin(), samples[i].features.end(), X.row_ptr(i));
    return X;
}

Matrix LabeledDataset::feature_matrix(const std::vector<int>& ids) const {
    Matrix X(ids.size(), feature_dim);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Sample& s = samples.at(static_cast<std::size_t>(ids[i]));
        std::copy(s.features.begin(), s.features.end(), X.row_ptr(i));
    }
    return X;
}

Matrix LabeledDataset::observed_one_hot() const {
    Matrix T(samples.size(), num_classes);
    for (std::size_t i = 0; i < samples.size(); ++i) T(i, samples[i].observed_label) = 1.0;
    return T;
}

std::vector<int> LabeledDataset::observed_labels() const {
    std::vector<int> y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) y[i] = samples[i].observed_label;
    return y;
}

std::vector<double> LabeledDataset::feature_std() const {
    std::vector<double> mean(feature_dim, 0.0), var(feature_dim, 0.0);
    const double n = static_cast<double>(samples.size());
    for (const Sample& s : samples)
        for (int f = 0; f < feature_dim; ++f) mean[f] += s.features[f];
    for (double& m : mean) m /= n;
    for (const Sample& s : samples)
        for (int f = 0; f < feature_dim; ++f) {
            const double d = s.features[f] - mean[f];
            var[f] += d * d;
        }
    std::vector<double> sd(feature_dim);
    for (int f = 0; f < feature_dim; ++f) sd[f] = std::sqrt(var[f] / n);
    return sd;
}

std::size_t FlipMask::count() const {
    return static_cast<std::size_t>(std::count(flipped.begin(), flipped.end(), true));
}

double FlipMask::fraction() const {
    return flipped.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(flipped.size());
}

LabeledDataset synth_blobs(int num_classes, int per_class, int feature_dim, double separation,
                           std::uint64_t seed) {
    if (num_classes < 2 || per_class < 1 || feature_dim < 2 || separation <= 0.0)
        throw config_error("synth_blobs: need C >= 2, n >= 1, d >= 2, separation > 0");

    // Cluster means on a circle in the first two dimensions; the chord between
    // adjacent means equals `separation`.
    const double radius = separation / (2.0 * std::sin(M_PI / num_classes));
    LabeledDataset ds;
    ds.num_classes = num_classes;
    ds.feature_dim = feature_dim;
    ds.samples.reserve(static_cast<std::size_t>(num_classes) * per_class);

    Rng rng = make_rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    int id = 0;
    for (int c = 0; c < num_classes; ++c) {
        const double angle = 2.0 * M_PI * c / num_classes;
        for (int j = 0; j < per_class; ++j) {
            Sample s;
            s.id = id++;
            s.observed_label = c;
            s.true_label = c;
            s.features.resize(feature_dim);
            for (int f = 0; f < feature_dim; ++f) s.features[f] = unit(rng);
            s.features[0] += radius * std::cos(angle);
            s.features[1] += radius * std::sin(angle);
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

std::pair<LabeledDataset, FlipMask> inject_noise(const LabeledDataset& dataset,
                                                 const NoiseSpec& spec, std::uint64_t seed) {
    if (spec.ratio < 0.0 || spec.ratio >= 1.0)
        throw config_error("inject_noise: ratio must be in [0,1)");
    if (!dataset.has_true_labels())
        throw config_error("inject_noise: dataset has no true labels");
    const int C = dataset.num_classes;
    if (spec.kind == NoiseKind::asymmetric) {
        if (spec.permutation.size() != static_cast<std::size_t>(C))
            throw config_error("inject_noise: asymmetric noise needs a permutation of size C");
        bool any_moved = false;
        for (int c = 0; c < C; ++c) {
            if (spec.permutation[c] < 0 || spec.permutation[c] >= C)
                throw config_error("inject_noise: permutation entry out of [0,C)");
            any_moved = any_moved || spec.permutation[c] != c;
        }
        if (!any_moved) throw config_error("inject_noise: permutation moves no class");
    }

    const std::size_t N = dataset.size();
    LabeledDataset out = dataset;
    FlipMask mask;
    mask.flipped.assign(N, false);

    Rng rng = make_rng(seed);
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_sel = quantile_count(N, spec.ratio);
    std::vector<std::size_t> selected(order.begin(), order.begin() + n_sel);
    std::sort(selected.begin(), selected.end());

    for (std::size_t i : selected) {
        Sample& s = out.samples[i];
        if (spec.kind == NoiseKind::symmetric) {
            if (spec.exclude_self) {
                std::uniform_int_distribution<int> pick(0, C - 2);
                int j = pick(rng);
                if (j >= s.true_label.value()) ++j;
                s.observed_label = j;
            } else {
                std::uniform_int_distribution<int> pick(0, C - 1);
                s.observed_label = pick(rng);
            }
        } else {
            s.observed_label = spec.permutation[static_cast<std::size_t>(s.true_label.value())];
        }
    }
    for (std::size_t i = 0; i < N; ++i)
        mask.flipped[i] = out.samples[i].observed_label != out.samples[i].true_label.value();
    return {std::move(out), std::move(mask)};
}

LabeledDataset load_csv(const std::string& path, int expected_classes) {
    std::ifstream in(path);
    if (!in) throw ingestion_error("load_csv: cannot open " + path);

    auto split_fields = [](const std::string& line) {
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        fields.push_back(cur);
        return fields;
    };

    std::string line;
    if (!std::getline(in, line)) throw ingestion_error("load_csv: empty file " + path);
    const std::vector<std::string> header = split_fields(line);

    int d = 0;
    while (d < static_cast<int>(header.size()) && header[d] == "f" + std::to_string(d)) ++d;
    if (d == 0) throw ingestion_error("load_csv: header must start with f0,f1,...");
    bool has_true = false;
    if (static_cast<int>(header.size()) == d + 1 && header[d] == "label") {
        has_true = false;
    } else if (static_cast<int>(header.size()) == d + 2 && header[d] == "label" &&
               header[d + 1] == "true_label") {
        has_true = true;
    } else {
        throw ingestion_error("load_csv: header must be f0..f" + std::to_string(d - 1) +
                              ",label[,true_label]");
    }

    LabeledDataset ds;
    ds.feature_dim = d;
    int max_label = -1;
    int line_no = 1;
    auto parse_int = [&](const std::string& s, const char* what) {
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size())
            throw ingestion_error("load_csv: non-numeric " + std::string(what) + " at line " +
                                  std::to_string(line_no));
        return static_cast<int>(v);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size())
            throw ingestion_error("load_csv: ragged row at line " + std::to_string(line_no) +
                                  " (" + std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()) + ")");
        Sample s;
        s.id = static_cast<int>(ds.samples.size());
        s.features.resize(d);
        for (int f = 0; f < d; ++f) {
            char* end = nullptr;
            s.features[f] = std::strtod(fields[f].c_str(), &end);
            if (fields[f].empty() || end != fields[f].c_str() + fields[f].size())
                throw ingestion_error("load_csv: non-numeric cell at line " +
                                      std::to_string(line_no) + ", column f" + std::to_string(f));
        }
        s.observed_label = parse_int(fields[d], "label");
        if (s.observed_label < 0)
            throw ingestion_error("load_csv: negative label at line " + std::to_string(line_no));
        if (has_true) {
            const int t = parse_int(fields[d + 1], "true_label");
            if (t < 0)
                throw ingestion_error("load_csv: negative true_label at line " +
                                      std::to_string(line_no));
            s.true_label = t;
            max_label = std::max(max_label, t);
        }
        max_label = std::max(max_label, s.observed_label);
        if (expected_classes > 0 && max_label >= expected_classes)
            throw ingestion_error("load_csv: label >= C at line " + std::to_string(line_no));
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw ingestion_error("load_csv: no data rows in " + path);
    ds.num_classes = expected_classes > 0 ? expected_classes : max_label + 1;
    return ds;
}

void save_csv(const LabeledDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ingestion_error("save_csv: cannot open " + path + " for writing");
    const bool has_true = dataset.has_true_labels();
    for (int f = 0; f < dataset.feature_dim; ++f) out << "f" << f << ",";
    out << "label";
    if (has_true) out << ",true_label";
    out << "\n";
    for (const Sample& s : dataset.samples) {
        for (int f = 0; f < dataset.feature_dim; ++f) out << format_double(s.features[f]) << ",";
        out << s.observed_label;
        if (has_true) out << "," << s.true_label.value();
        out << "\n";
    }
    if (!out) throw ingestion_error("save_csv: write failed for " + path);
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset,
                                                std::pair<double, double> fractions,
                                                std::uint64_t seed) {
    if (fractions.first < 0.0 || fractions.second < 0.0 ||
        std::abs(fractions.first + fractions.second - 1.0) > 1e-9)
        throw config_error("split: fractions must be non-negative and sum to 1");

    std::vector<std::vector<int>> by_class(dataset.num_classes);
    for (const Sample& s : dataset.samples) by_class[s.observed_label].push_back(s.id);

    Rng rng = make_rng(seed);
    std::vector<int> first_ids, second_ids;
    for (auto& group : by_class) {
        std::shuffle(group.begin(), group.end(), rng);
        const std::size_t n1 = quantile_count(group.size(), fractions.first);
        first_ids.insert(first_ids.end(), group.begin(), group.begin() + n1);
        second_ids.insert(second_ids.end(), group.begin() + n1, group.end());
    }
    std::sort(first_ids.begin(), first_ids.end());
    std::sort(second_ids.begin(), second_ids.end());

    auto build = [&](const std::vector<int>& ids) {
        LabeledDataset part;
        part.num_classes = dataset.num_classes;
        part.feature_dim = dataset.feature_dim;
        part.samples.reserve(ids.size());
        for (int id : ids) {
            Sample s = dataset.samples[static_cast<std::size_t>(id)];
            s.id = static_cast<int>(part.samples.size());
            part.samples.push_back(std::move(s));
        }
        return part;
    };
    return {build(first_ids), build(second_ids)};
}

double estimate_noise_ratio(const LabeledDataset& dataset, const TrainConfig& trainer_config,
                            std::uint64_t seed) {
    if (dataset.size() < static_cast<std::size_t>(2 * dataset.num_classes * 10))
        throw degenerate_error("estimate_noise_ratio: dataset too small (need N >= 20*C)");

    auto halves = split(dataset, {0.5, 0.5}, derive_seed(seed, 0));

    auto disagreement = [&](const LabeledDataset& train_half, const LabeledDataset& eval_half,
                            std::uint64_t net_seed) {
        TrainConfig cfg = trainer_config;
        cfg.seed = net_seed;
        Mlp model({dataset.feature_dim, 64, 64, dataset.num_classes}, derive_seed(net_seed, 1));
        warmup_train(model, train_half, cfg);
        const std::vector<int> preds = predict(model, eval_half.feature_matrix());
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (preds[i] != eval_half.samples[i].observed_label) ++wrong;
        return static_cast<double>(wrong) / static_cast<double>(eval_half.size());
    };

    const double a = disagreement(halves.first, halves.second, derive_seed(seed, 2));
    const double b = disagreement(halves.second, halves.first, derive_seed(seed, 3));
    return 0.5 * (a + b);
}

} // namespace pgdf
