#include "pgdf/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pgdf/errors.hpp"
#include "pgdf/kernels.hpp"
#include "pgdf/prior.hpp"

#include "json.hpp"

namespace pgdf {

namespace fs = std::filesystem;

const std::vector<std::string> kAllArms = {"full",       "no-prior",  "no-gmm",
                                           "no-refine",  "no-enhance", "single-network"};

namespace {

void setup_backend(const ExperimentConfig& cfg) {
    kernels::set_backend(cfg.run_parallel ? kernels::Backend::openmp : kernels::Backend::serial);
}

fs::path ensure_out_dir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.run_out);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ingestion_error("cannot open " + path.string() + " for writing");
    out << text;
}

void write_resolved_config(const ExperimentConfig& cfg, const fs::path& dir) {
    write_text(dir / "config.resolved", cfg.serialize());
}

void require_artifact(const std::string& path, const char* what) {
    if (path.empty())
        throw config_error(std::string("missing input: ") + what + " is not configured");
    if (!fs::exists(path))
        throw config_error(std::string("missing input: ") + what + " '" + path + "' not found");
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / static_cast<double>(xs.size() - 1))};
}

} // namespace

RunData prepare_data(const ExperimentConfig& cfg) {
    RunData data;
    if (cfg.dataset_source == "csv") {
        require_artifact(cfg.dataset_csv, "dataset.csv");
        data.train = load_csv(cfg.dataset_csv);
        if (!cfg.dataset_test_csv.empty()) {
            require_artifact(cfg.dataset_test_csv, "dataset.test_csv");
            data.test = load_csv(cfg.dataset_test_csv, data.train.num_classes);
        } else {
            auto parts = split(data.train, {0.8, 0.2}, derive_seed(cfg.run_seed, 50));
            data.train = std::move(parts.first);
            data.test = std::move(parts.second);
        }
    } else if (cfg.dataset_source == "synth") {
        data.train = synth_blobs(cfg.dataset_classes, cfg.dataset_per_class, cfg.dataset_dim,
                                 cfg.dataset_separation, derive_seed(cfg.run_seed, 51));
        data.test = synth_blobs(cfg.dataset_classes, cfg.dataset_test_per_class, cfg.dataset_dim,
                                cfg.dataset_separation, derive_seed(cfg.run_seed, 52));
        if (cfg.noise_ratio > 0.0) {
            auto [noisy, mask] =
                inject_noise(data.train, cfg.noise_spec(), derive_seed(cfg.run_seed, 53));
            data.train = std::move(noisy);
            data.flips = std::move(mask);
        }
    } else {
        throw config_error("dataset.source must be synth or csv");
    }

    if (!data.flips && data.train.has_true_labels()) {
        FlipMask fm;
        fm.flipped.resize(data.train.size());
        for (std::size_t i = 0; i < data.train.size(); ++i)
            fm.flipped[i] =
                data.train.samples[i].observed_label != *data.train.samples[i].true_label;
        data.flips = std::move(fm);
    }

    if (cfg.noise_estimate) {
        TrainConfig tc = cfg.trainer_config();
        const double actual = estimate_noise_ratio(data.train, tc, derive_seed(cfg.run_seed, 54));
        // The estimator tracks the actual flip fraction; symmetric injection
        // over all C classes flips tau*(C-1)/C, so invert that to recover the
        // nominal ratio downstream thresholds expect.
        const double c = static_cast<double>(data.train.num_classes);
        data.nominal_tau = std::clamp(actual * c / (c - 1.0), 0.0, 0.95);
    } else {
        data.nominal_tau = cfg.noise_ratio;
    }
    return data;
}

int run_synth(const ExperimentConfig& cfg) {
    setup_backend(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    const LabeledDataset train =
        synth_blobs(cfg.dataset_classes, cfg.dataset_per_class, cfg.dataset_dim,
                    cfg.dataset_separation, derive_seed(cfg.run_seed, 51));
    const LabeledDataset test =
        synth_blobs(cfg.dataset_classes, cfg.dataset_test_per_class, cfg.dataset_dim,
                    cfg.dataset_separation, derive_seed(cfg.run_seed, 52));
    save_csv(train, (dir / "train.csv").string());
    save_csv(test, (dir / "test.csv").string());
    write_resolved_config(cfg, dir);
    std::cout << "wrote " << (dir / "train.csv").string() << " (" << train.size()
              << " samples) and " << (dir / "test.csv").string() << " (" << test.size()
              << " samples)\n";
    return 0;
}

int run_inject(const ExperimentConfig& cfg) {
    setup_backend(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    require_artifact(cfg.dataset_csv, "dataset.csv");
    const LabeledDataset clean = load_csv(cfg.dataset_csv);
    auto [noisy, mask] = inject_noise(clean, cfg.noise_spec(), derive_seed(cfg.run_seed, 53));
    save_csv(noisy, (dir / "noisy.csv").string());

    nlohmann::ordered_json j;
    j["samples"] = noisy.size();
    j["noise_kind"] = cfg.noise_kind;
    j["nominal_ratio"] = cfg.noise_ratio;
    j["actual_flips"] = mask.count();
    j["actual_flip_fraction"] = mask.fraction();
    write_text(dir / "inject.json", j.dump(2) + "\n");
    write_resolved_config(cfg, dir);
    std::cout << "wrote " << (dir / "noisy.csv").string() << " with " << mask.count()
              << " flipped labels (" << mask.fraction() << ")\n";
    return 0;
}

int run_warmup(const ExperimentConfig& cfg) {
    setup_backend(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    const RunData data = prepare_data(cfg);

    std::vector<int> sizes;
    sizes.push_back(data.train.feature_dim);
    const std::vector<int> hidden = cfg.hidden_sizes();
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(data.train.num_classes);
    Mlp model(sizes, derive_seed(cfg.run_seed, 1));

    ProbabilityHistory history(data.train.size());
    TrainConfig tc = cfg.trainer_config();
    tc.seed = derive_seed(cfg.run_seed, 31);
    warmup_train(model, data.train, tc, [&](int epoch, const std::vector<double>& probs) {
        history.record(epoch, probs);
    });

    save_history_csv(history, (dir / "history.csv").string());
    model.save((dir / "model_warmup.txt").string());
    if (data.flips) {
        const SeparationReport rep = separation_report(mean_history(history), *data.flips);
        write_text(dir / "separation.json", rep.to_json() + "\n");
    }
    write_resolved_config(cfg, dir);
    std::cout << "wrote " << (dir / "history.csv").string() << " (" << history.epochs()
              << " epochs)\n";
    return 0;
}

int run_prior(const ExperimentConfig& cfg) {
    setup_backend(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    const RunData data = prepare_data(cfg);
    const PgdfConfig pc = cfg.pgdf_config(data.nominal_tau);

    TrainConfig tc = cfg.trainer_config();
    tc.epochs = pc.prior_history_epochs;
    const PriorResult prior =
        generate_prior(data.train, pc.hidden, tc, pc.prior, pc.tau, pc.effective_tau_e(),
                       pc.effective_tau_n1(), derive_seed(cfg.run_seed, 100));

    write_text(dir / "prior.json", prior.partition.to_json() + "\n");
    if (data.flips) {
        const SeparationReport rep = separation_report(prior.dataset_means, *data.flips);
        write_text(dir / "prior_separation.json", rep.to_json() + "\n");
    }
    const SeparationReport da_rep = separation_report(prior.da_means, prior.da_flips);
    write_text(dir / "da_separation.json", da_rep.to_json() + "\n");
    write_resolved_config(cfg, dir);
    std::cout << "prior: " << prior.partition.easy_ids.size() << " easy, "
              << prior.partition.hard_ids.size() << " hard, "
              << prior.partition.noisy_direct_ids.size() << "+"
              << prior.partition.noisy_classified_ids.size() << " noisy\n";
    return 0;
}

int run_train(const ExperimentConfig& cfg, const std::string& arm) {
    setup_backend(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    const RunData data = prepare_data(cfg);
    PgdfConfig pc = cfg.pgdf_config(data.nominal_tau);
    apply_arm(pc, arm);

    std::ofstream metrics(dir / "metrics.jsonl");
    if (!metrics) throw ingestion_error("cannot open metrics.jsonl for writing");
    const MetricsSink sink = [&](const std::string& line) {
        metrics << line << "\n";
        metrics.flush();
    };

    const PgdfResult result = train_pgdf(data.train, data.test, pc, cfg.trainer_config(), sink);

    result.net_a.save((dir / "model_a.txt").string());
    result.net_b.save((dir / "model_b.txt").string());
    if (result.prior) write_text(dir / "prior.json", result.prior->partition.to_json() + "\n");

    nlohmann::ordered_json j;
    j["arm"] = arm;
    j["final_test_accuracy"] = result.final_test_accuracy;
    j["final_test_accuracy_a"] = result.final_test_accuracy_a;
    j["final_test_accuracy_b"] = result.final_test_accuracy_b;
    j["nominal_tau"] = data.nominal_tau;
    write_text(dir / "eval.json", j.dump(2) + "\n");
    write_resolved_config(cfg, dir);
    std::cout << "final test accuracy " << result.final_test_accuracy << " (arm " << arm << ")\n";
    return 0;
}

int run_eval(const ExperimentConfig& cfg, const std::string& model_path,
             const std::string& data_csv) {
    setup_backend(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    require_artifact(model_path, "model checkpoint");
    require_artifact(data_csv, "evaluation csv");

    const Mlp model = Mlp::load(model_path);
    const LabeledDataset ds = load_csv(data_csv, model.num_classes());
    std::vector<int> labels(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        labels[i] =
            ds.samples[i].true_label ? *ds.samples[i].true_label : ds.samples[i].observed_label;
    const double acc = accuracy_against(model, ds.feature_matrix(), labels);

    nlohmann::ordered_json j;
    j["model"] = model_path;
    j["data"] = data_csv;
    j["samples"] = ds.size();
    j["accuracy"] = acc;
    write_text(dir / "eval.json", j.dump(2) + "\n");
    std::cout << "accuracy " << acc << " on " << ds.size() << " samples\n";
    return 0;
}

void apply_arm(PgdfConfig& config, const std::string& arm) {
    if (arm == "full") return;
    if (arm == "no-prior")
        config.use_prior = false;
    else if (arm == "no-gmm")
        config.use_gmm = false;
    else if (arm == "no-refine")
        config.use_refine = false;
    else if (arm == "no-enhance")
        config.use_enhance = false;
    else if (arm == "single-network")
        config.two_networks = false;
    else
        throw config_error("unknown ablation arm '" + arm + "'");
}

AblateReport run_ablate(const ExperimentConfig& cfg, const std::vector<std::string>& arms,
                        int num_seeds) {
    setup_backend(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    if (num_seeds < 1) throw config_error("ablate: need at least one seed");

    AblateReport report;
    for (const std::string& arm : arms) {
        ArmOutcome outcome;
        outcome.arm = arm;
        try {
            for (int s = 0; s < num_seeds; ++s) {
                ExperimentConfig run_cfg = cfg;
                run_cfg.run_seed = cfg.run_seed + static_cast<std::uint64_t>(s);
                const RunData data = prepare_data(run_cfg);
                PgdfConfig pc = run_cfg.pgdf_config(data.nominal_tau);
                apply_arm(pc, arm);
                const PgdfResult result =
                    train_pgdf(data.train, data.test, pc, run_cfg.trainer_config());
                outcome.seeds.push_back(run_cfg.run_seed);
                outcome.accuracies.push_back(result.final_test_accuracy);
            }
            const auto [mean, sd] = mean_std(outcome.accuracies);
            outcome.mean = mean;
            outcome.stddev = sd;
        } catch (const std::exception& e) {
            outcome.failed = true;
            outcome.error = e.what();
        }
        report.arms.push_back(std::move(outcome));
    }

    write_text(dir / "ablate_report.csv", report.to_csv());
    write_text(dir / "ablate_report.json", report.to_json());
    write_resolved_config(cfg, dir);
    std::cout << report.to_table();
    return report;
}

std::string AblateReport::to_csv() const {
    std::ostringstream out;
    out << "arm,mean,std,seeds,accuracies,status\n";
    for (const ArmOutcome& a : arms) {
        out << a.arm << "," << a.mean << "," << a.stddev << ",";
        for (std::size_t i = 0; i < a.seeds.size(); ++i)
            out << (i ? ";" : "") << a.seeds[i];
        out << ",";
        for (std::size_t i = 0; i < a.accuracies.size(); ++i)
            out << (i ? ";" : "") << a.accuracies[i];
        out << "," << (a.failed ? "failed" : "ok") << "\n";
    }
    return out.str();
}

std::string AblateReport::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const ArmOutcome& a : arms) {
        nlohmann::ordered_json row;
        row["arm"] = a.arm;
        row["mean"] = a.mean;
        row["std"] = a.stddev;
        row["seeds"] = a.seeds;
        row["accuracies"] = a.accuracies;
        row["status"] = a.failed ? "failed" : "ok";
        if (a.failed) row["error"] = a.error;
        j.push_back(row);
    }
    return j.dump(2) + "\n";
}

std::string AblateReport::to_table() const {
    std::ostringstream out;
    out << "arm              mean     std      status\n";
    char buf[128];
    for (const ArmOutcome& a : arms) {
        std::snprintf(buf, sizeof(buf), "%-16s %.4f   %.4f   %s\n", a.arm.c_str(), a.mean,
                      a.stddev, a.failed ? "FAILED" : "ok");
        out << buf;
    }
    return out.str();
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                const std::vector<double>& values, int num_seeds) {
    setup_backend(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    std::string key;
    if (parameter == "tau_e")
        key = "prior.tau_e";
    else if (parameter == "tau_n1")
        key = "prior.tau_n1";
    else if (parameter == "m")
        key = "divide.m";
    else if (parameter == "r")
        key = "semisup.r";
    else
        throw config_error("sweep parameter must be one of tau_e, tau_n1, m, r");
    if (values.empty()) throw config_error("sweep: no values given");

    std::vector<SweepRow> rows;
    for (double value : values) {
        SweepRow row;
        row.parameter = parameter;
        row.value = value;
        ExperimentConfig value_cfg = cfg;
        char vbuf[40];
        std::snprintf(vbuf, sizeof(vbuf), "%.17g", value);
        value_cfg.set(key, vbuf);

        const std::string cfg_name = "sweep_" + parameter + "_" + std::to_string(value) + ".config";
        row.config_path = (dir / cfg_name).string();
        write_text(dir / cfg_name, value_cfg.serialize());

        for (int s = 0; s < num_seeds; ++s) {
            ExperimentConfig run_cfg = value_cfg;
            run_cfg.run_seed = cfg.run_seed + static_cast<std::uint64_t>(s);
            const RunData data = prepare_data(run_cfg);
            const PgdfConfig pc = run_cfg.pgdf_config(data.nominal_tau);
            const PgdfResult result =
                train_pgdf(data.train, data.test, pc, run_cfg.trainer_config());
            row.seeds.push_back(run_cfg.run_seed);
            row.accuracies.push_back(result.final_test_accuracy);
        }
        const auto [mean, sd] = mean_std(row.accuracies);
        row.mean = mean;
        row.stddev = sd;
        rows.push_back(std::move(row));
    }

    std::ostringstream csv;
    csv << "parameter,value,mean,std,seeds,accuracies,config\n";
    for (const SweepRow& row : rows) {
        csv << row.parameter << "," << row.value << "," << row.mean << "," << row.stddev << ",";
        for (std::size_t i = 0; i < row.seeds.size(); ++i) csv << (i ? ";" : "") << row.seeds[i];
        csv << ",";
        for (std::size_t i = 0; i < row.accuracies.size(); ++i)
            csv << (i ? ";" : "") << row.accuracies[i];
        csv << "," << row.config_path << "\n";
    }
    write_text(dir / "sweep.csv", csv.str());
    write_resolved_config(cfg, dir);
    std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << rows.size() << " rows)\n";
    return rows;
}

} // namespace pgdf
