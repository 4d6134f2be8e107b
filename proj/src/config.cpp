#include "pgdf/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "pgdf/errors.hpp"

namespace pgdf {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("config: " + key + " expects a boolean, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        throw config_error("config: " + key + " expects a number, got '" + v + "'");
    return x;
}

int parse_int(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size())
        throw config_error("config: " + key + " expects an integer, got '" + v + "'");
    return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size())
        throw config_error("config: " + key + " expects an unsigned integer, got '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(ExperimentConfig&, const std::string&)> setter;
    std::function<std::string(const ExperimentConfig&)> getter;
};

const std::map<std::string, Field>& field_table() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        auto add_str = [&](const std::string& key, std::string ExperimentConfig::*member) {
            t[key] = {[member](ExperimentConfig& c, const std::string& v) { c.*member = v; },
                      [member](const ExperimentConfig& c) { return c.*member; }};
        };
        auto add_int = [&](const std::string& key, int ExperimentConfig::*member) {
            t[key] = {[member, key](ExperimentConfig& c, const std::string& v) {
                          c.*member = parse_int(v, key);
                      },
                      [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
        };
        auto add_dbl = [&](const std::string& key, double ExperimentConfig::*member) {
            t[key] = {[member, key](ExperimentConfig& c, const std::string& v) {
                          c.*member = parse_double(v, key);
                      },
                      [member](const ExperimentConfig& c) { return format_double(c.*member); }};
        };
        auto add_bool = [&](const std::string& key, bool ExperimentConfig::*member) {
            t[key] = {[member, key](ExperimentConfig& c, const std::string& v) {
                          c.*member = parse_bool(v, key);
                      },
                      [member](const ExperimentConfig& c) {
                          return c.*member ? std::string("true") : std::string("false");
                      }};
        };
        auto add_u64 = [&](const std::string& key, std::uint64_t ExperimentConfig::*member) {
            t[key] = {[member, key](ExperimentConfig& c, const std::string& v) {
                          c.*member = parse_u64(v, key);
                      },
                      [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
        };

        add_str("dataset.source", &ExperimentConfig::dataset_source);
        add_int("dataset.classes", &ExperimentConfig::dataset_classes);
        add_int("dataset.per_class", &ExperimentConfig::dataset_per_class);
        add_int("dataset.test_per_class", &ExperimentConfig::dataset_test_per_class);
        add_int("dataset.dim", &ExperimentConfig::dataset_dim);
        add_dbl("dataset.separation", &ExperimentConfig::dataset_separation);
        add_str("dataset.csv", &ExperimentConfig::dataset_csv);
        add_str("dataset.test_csv", &ExperimentConfig::dataset_test_csv);

        add_str("noise.kind", &ExperimentConfig::noise_kind);
        add_dbl("noise.ratio", &ExperimentConfig::noise_ratio);
        add_str("noise.permutation", &ExperimentConfig::noise_permutation);
        add_bool("noise.exclude_self", &ExperimentConfig::noise_exclude_self);
        add_bool("noise.estimate", &ExperimentConfig::noise_estimate);

        add_dbl("trainer.learning_rate", &ExperimentConfig::trainer_learning_rate);
        add_dbl("trainer.momentum", &ExperimentConfig::trainer_momentum);
        add_dbl("trainer.weight_decay", &ExperimentConfig::trainer_weight_decay);
        add_int("trainer.batch_size", &ExperimentConfig::trainer_batch_size);
        add_str("trainer.hidden", &ExperimentConfig::trainer_hidden);

        add_dbl("prior.tau_e", &ExperimentConfig::prior_tau_e);
        add_dbl("prior.tau_n1", &ExperimentConfig::prior_tau_n1);
        add_int("prior.history_epochs", &ExperimentConfig::prior_history_epochs);
        add_bool("prior.retrain_from_scratch", &ExperimentConfig::prior_retrain_from_scratch);
        add_int("prior.refresh_every", &ExperimentConfig::prior_refresh_every);
        add_int("prior.mm_epochs", &ExperimentConfig::prior_mm_epochs);
        add_dbl("prior.mm_learning_rate", &ExperimentConfig::prior_mm_learning_rate);
        add_dbl("prior.mm_momentum", &ExperimentConfig::prior_mm_momentum);
        add_str("prior.mm_channels", &ExperimentConfig::prior_mm_channels);
        add_int("prior.mm_kernel", &ExperimentConfig::prior_mm_kernel);

        add_int("gmm.max_iter", &ExperimentConfig::gmm_max_iter);
        add_dbl("gmm.tol", &ExperimentConfig::gmm_tol);

        add_dbl("divide.m", &ExperimentConfig::divide_m);
        add_int("divide.refit_every", &ExperimentConfig::divide_refit_every);
        add_bool("divide.dump", &ExperimentConfig::divide_dump);

        add_int("refine.n_aug", &ExperimentConfig::refine_n_aug);
        add_dbl("refine.jitter", &ExperimentConfig::refine_jitter);
        add_dbl("refine.temperature", &ExperimentConfig::refine_temperature);
        add_dbl("refine.ridge_epsilon", &ExperimentConfig::refine_ridge_epsilon);

        add_dbl("semisup.alpha", &ExperimentConfig::semisup_alpha);
        add_dbl("semisup.lambda_u", &ExperimentConfig::semisup_lambda_u);
        add_dbl("semisup.lambda_r", &ExperimentConfig::semisup_lambda_r);
        add_int("semisup.rampup_epochs", &ExperimentConfig::semisup_rampup_epochs);
        add_dbl("semisup.r", &ExperimentConfig::semisup_r);
        add_int("semisup.epochs", &ExperimentConfig::semisup_epochs);
        add_int("semisup.warm_up", &ExperimentConfig::semisup_warm_up);
        add_dbl("semisup.no_prior_easy_threshold",
                &ExperimentConfig::semisup_no_prior_easy_threshold);

        add_u64("run.seed", &ExperimentConfig::run_seed);
        add_str("run.out", &ExperimentConfig::run_out);
        add_bool("run.parallel", &ExperimentConfig::run_parallel);
        return t;
    }();
    return table;
}

} // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const auto it = field_table().find(key);
    if (it == field_table().end()) throw config_error("config: unknown key '" + key + "'");
    it->second.setter(*this, value);
}

std::string ExperimentConfig::get(const std::string& key) const {
    const auto it = field_table().find(key);
    if (it == field_table().end()) throw config_error("config: unknown key '" + key + "'");
    return it->second.getter(*this);
}

std::vector<std::string> ExperimentConfig::known_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, v] : field_table()) keys.push_back(k);
    return keys;
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream out;
    for (const auto& [key, field] : field_table())
        out << key << " = " << field.getter(*this) << "\n";
    return out.str();
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error("config: missing '=' at " + path + ":" + std::to_string(line_no));
        cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return cfg;
}

void ExperimentConfig::apply_overrides(const std::vector<std::string>& key_value_pairs) {
    for (const std::string& kv : key_value_pairs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("config: --set expects key=value, got '" + kv + "'");
        set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
}

namespace {
std::vector<int> parse_int_list(const std::string& csv, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_int(item, key));
    }
    if (out.empty()) throw config_error("config: " + key + " must list at least one integer");
    return out;
}
} // namespace

std::vector<int> ExperimentConfig::hidden_sizes() const {
    return parse_int_list(trainer_hidden, "trainer.hidden");
}

TrainConfig ExperimentConfig::trainer_config() const {
    TrainConfig t;
    t.learning_rate = trainer_learning_rate;
    t.momentum = trainer_momentum;
    t.weight_decay = trainer_weight_decay;
    t.batch_size = trainer_batch_size;
    t.epochs = semisup_warm_up;
    t.seed = run_seed;
    if (t.learning_rate < 0.0) throw config_error("trainer.learning_rate must be >= 0");
    if (t.momentum < 0.0 || t.momentum >= 1.0) throw config_error("trainer.momentum in [0,1)");
    if (t.batch_size < 1) throw config_error("trainer.batch_size must be >= 1");
    return t;
}

NoiseSpec ExperimentConfig::noise_spec() const {
    NoiseSpec spec;
    if (noise_kind == "symmetric")
        spec.kind = NoiseKind::symmetric;
    else if (noise_kind == "asymmetric")
        spec.kind = NoiseKind::asymmetric;
    else
        throw config_error("noise.kind must be symmetric or asymmetric");
    spec.ratio = noise_ratio;
    spec.exclude_self = noise_exclude_self;
    if (!noise_permutation.empty())
        spec.permutation = parse_int_list(noise_permutation, "noise.permutation");
    return spec;
}

PgdfConfig ExperimentConfig::pgdf_config(double tau) const {
    PgdfConfig p;
    p.m = divide_m;
    p.r = semisup_r;
    p.alpha = semisup_alpha;
    p.lambda_u = semisup_lambda_u;
    p.lambda_r = semisup_lambda_r;
    p.rampup_epochs = semisup_rampup_epochs;
    p.epochs = semisup_epochs;
    p.warm_up = semisup_warm_up;
    p.seed = run_seed;
    p.hidden = hidden_sizes();
    p.tau = tau;
    p.tau_e = prior_tau_e;
    p.tau_n1 = prior_tau_n1;
    p.gmm_max_iter = gmm_max_iter;
    p.gmm_tol = gmm_tol;
    p.refit_every = divide_refit_every;
    p.no_prior_easy_threshold = semisup_no_prior_easy_threshold;
    p.prior.mm.channels = parse_int_list(prior_mm_channels, "prior.mm_channels");
    p.prior.mm.kernel = prior_mm_kernel;
    p.prior.mm.learning_rate = prior_mm_learning_rate;
    p.prior.mm.momentum = prior_mm_momentum;
    p.prior.mm.epochs = prior_mm_epochs;
    p.prior.noise_exclude_self = noise_exclude_self;
    p.prior.retrain_from_scratch = prior_retrain_from_scratch;
    p.prior_history_epochs = prior_history_epochs;
    p.prior_refresh_every = prior_refresh_every;
    p.n_aug = refine_n_aug;
    p.jitter = refine_jitter;
    p.temperature = refine_temperature;
    p.ridge_epsilon = refine_ridge_epsilon;
    if (p.m < 0.0 || p.m > 1.0) throw config_error("divide.m must be in [0,1]");
    if (p.r < 0.0) throw config_error("semisup.r must be >= 0");
    if (p.alpha <= 0.0) throw config_error("semisup.alpha must be > 0");
    return p;
}

} // namespace pgdf
