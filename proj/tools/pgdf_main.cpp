#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pgdf/config.hpp"
#include "pgdf/errors.hpp"
#include "pgdf/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool out_given = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Config file (flat key = value lines)");
    cmd->add_option("--set", args.overrides, "Override a config key (key=value, repeatable)");
    cmd->add_option("--out", args.out_dir, "Output directory")->each([&](const std::string&) {
        args.out_given = true;
    });
    cmd->add_option("--seed", args.seed, "Master seed")->each([&](const std::string&) {
        args.seed_given = true;
    });
}

pgdf::ExperimentConfig resolve_config(const CommonArgs& args) {
    pgdf::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = pgdf::ExperimentConfig::from_file(args.config_path);
    cfg.apply_overrides(args.overrides);
    if (args.seed_given) cfg.run_seed = args.seed;
    if (args.out_given) cfg.run_out = args.out_dir;
    return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char ch : csv + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    return out;
}

std::vector<std::string> parse_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : csv + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pgdf: prior-guided denoising experiments on noisy-label datasets"};
    app.require_subcommand(1);

    CommonArgs synth_args, inject_args, warmup_args, prior_args, train_args, eval_args,
        ablate_args, sweep_args;

    CLI::App* synth = app.add_subcommand("synth", "Generate clean Gaussian-blob train/test CSVs");
    add_common(synth, synth_args);

    CLI::App* inject = app.add_subcommand("inject", "Inject label noise into a dataset CSV");
    add_common(inject, inject_args);

    CLI::App* warmup = app.add_subcommand("warmup", "Warm-up training with history recording");
    add_common(warmup, warmup_args);

    CLI::App* prior = app.add_subcommand("prior", "Run the prior generation module");
    add_common(prior, prior_args);

    CLI::App* train = app.add_subcommand("train", "Full two-network denoising training");
    add_common(train, train_args);
    std::string train_arm = "full";
    train->add_option("--arm", train_arm, "Pipeline variant (full or an ablation arm)");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint against a CSV");
    add_common(eval, eval_args);
    std::string eval_model, eval_data;
    eval->add_option("--model", eval_model, "Model checkpoint path")->required();
    eval->add_option("--data", eval_data, "Evaluation CSV path")->required();

    CLI::App* ablate = app.add_subcommand("ablate", "Compare ablation arms over shared seeds");
    add_common(ablate, ablate_args);
    std::string ablate_arms = "full,no-prior,no-gmm,no-refine,no-enhance,single-network";
    int ablate_seeds = 3;
    ablate->add_option("--arms", ablate_arms, "Comma-separated arm list");
    ablate->add_option("--seeds", ablate_seeds, "Number of seeds per arm");

    CLI::App* sweep = app.add_subcommand("sweep", "Sensitivity sweep over one hyper-parameter");
    add_common(sweep, sweep_args);
    std::string sweep_param, sweep_values;
    int sweep_seeds = 3;
    sweep->add_option("--param", sweep_param, "One of tau_e, tau_n1, m, r")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
    sweep->add_option("--seeds", sweep_seeds, "Number of seeds per value");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return pgdf::run_synth(resolve_config(synth_args));
        if (inject->parsed()) return pgdf::run_inject(resolve_config(inject_args));
        if (warmup->parsed()) return pgdf::run_warmup(resolve_config(warmup_args));
        if (prior->parsed()) return pgdf::run_prior(resolve_config(prior_args));
        if (train->parsed()) return pgdf::run_train(resolve_config(train_args), train_arm);
        if (eval->parsed())
            return pgdf::run_eval(resolve_config(eval_args), eval_model, eval_data);
        if (ablate->parsed()) {
            pgdf::run_ablate(resolve_config(ablate_args), parse_list(ablate_arms), ablate_seeds);
            return 0;
        }
        if (sweep->parsed()) {
            pgdf::run_sweep(resolve_config(sweep_args), sweep_param, parse_values(sweep_values),
                            sweep_seeds);
            return 0;
        }
    } catch (const pgdf::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
