// seqfeat: pipeline CLI for action-sequence feature extraction, penalized
// prediction of external covariates, and PLS-based interpretation.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "seqfeat/autoencoder.hpp"
#include "seqfeat/describe.hpp"
#include "seqfeat/errors.hpp"
#include "seqfeat/feature_matrix.hpp"
#include "seqfeat/interpret.hpp"
#include "seqfeat/io.hpp"
#include "seqfeat/mds.hpp"
#include "seqfeat/oss.hpp"
#include "seqfeat/pca.hpp"
#include "seqfeat/pls.hpp"
#include "seqfeat/predict.hpp"
#include "seqfeat/preprocess.hpp"
#include "seqfeat/rng.hpp"
#include "seqfeat/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seqfeat;

namespace {

struct TargetConfig {
    std::string name;
    Family family = Family::gaussian;
};

struct PatternConfig {
    PatternSpec spec;
};

struct PipelineConfig {
    std::string sequences_path;
    std::string covariates_path;
    std::string out_dir = "out";
    std::string feature_method = "mds"; // mds | seq2seq | both
    int k = 10;
    std::uint64_t seed = 1;

    MdsConfig mds;
    AeConfig ae;

    std::string sim_spec_path;
    int sim_n_subjects = 0;

    std::vector<TargetConfig> targets;
    std::vector<std::string> predictor_sets{"score", "mds"};
    int n_rep = 10;
    int lambda_grid_size = 50;
    double lambda_min_ratio = 1e-4;
    bool use_pca = true;

    std::string pls_item;
    std::string pls_target;
    std::string pls_features = "mds";
    int pls_max_components = 10;
    std::string pls_rmsep = "insample"; // insample | cv
    int pls_cv_folds = 10;

    std::vector<std::string> strip_tokens_list;

    std::string inspect_item;
    std::string inspect_target;
    int inspect_interval = 50;
    int inspect_window = 100;
    int inspect_grid = 40;
    double inspect_span = 2.0 / 3.0;
    std::vector<PatternConfig> patterns;
};

struct Overrides {
    std::optional<std::string> sequences, covariates, out_dir, method;
    std::optional<std::string> target, family, predictor_sets;
    std::optional<int> k, n_rep;
    std::optional<std::uint64_t> seed;
};

Family parse_family(const std::string& name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "binomial") return Family::binomial;
    throw ConfigError("unknown family '" + name + "' (expected gaussian or binomial)");
}

PatternSpec parse_pattern(const json& p) {
    PatternSpec spec;
    const std::string kind = p.at("kind").get<std::string>();
    if (kind == "contains-token") {
        spec.kind = PatternSpec::Kind::contains_token;
        spec.token = p.at("token").get<std::string>();
    } else if (kind == "contains-subsequence") {
        spec.kind = PatternSpec::Kind::contains_subsequence;
        spec.subsequence = p.at("tokens").get<std::vector<std::string>>();
    } else if (kind == "token-count") {
        spec.kind = PatternSpec::Kind::token_count;
        spec.token = p.at("token").get<std::string>();
    } else if (kind == "predicate") {
        spec.kind = PatternSpec::Kind::predicate;
        spec.predicate_name = p.at("name").get<std::string>();
    } else {
        throw ConfigError("unknown pattern kind '" + kind + "'");
    }
    spec.label = p.value("label", spec.token.empty() ? kind : spec.token);
    return spec;
}

PipelineConfig load_config(const std::string& path, const Overrides& ov) {
    PipelineConfig cfg;
    std::vector<std::string> problems;

    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config '" + path + "'");
        json root;
        try {
            in >> root;
        } catch (const json::exception& e) {
            throw ConfigError("config '" + path + "': " + e.what());
        }
        try {
            if (root.contains("paths")) {
                const auto& p = root["paths"];
                cfg.sequences_path = p.value("sequences", "");
                cfg.covariates_path = p.value("covariates", "");
                cfg.out_dir = p.value("out_dir", cfg.out_dir);
            }
            cfg.feature_method = root.value("feature_method", cfg.feature_method);
            cfg.k = root.value("k", cfg.k);
            cfg.seed = root.value("seed", cfg.seed);
            if (root.contains("strip_tokens")) {
                cfg.strip_tokens_list = root["strip_tokens"].get<std::vector<std::string>>();
            }
            if (root.contains("mds")) {
                const auto& m = root["mds"];
                cfg.mds.max_iter = m.value("max_iter", cfg.mds.max_iter);
                cfg.mds.rel_tol = m.value("rel_tol", cfg.mds.rel_tol);
                const std::string init = m.value("init", "classical");
                if (init == "classical") {
                    cfg.mds.init = MdsConfig::Init::classical;
                } else if (init == "random") {
                    cfg.mds.init = MdsConfig::Init::random;
                } else {
                    problems.push_back("mds.init must be classical or random");
                }
            }
            if (root.contains("autoencoder")) {
                const auto& a = root["autoencoder"];
                cfg.ae.batch_size = a.value("batch_size", cfg.ae.batch_size);
                cfg.ae.max_epochs = a.value("max_epochs", cfg.ae.max_epochs);
                cfg.ae.patience = a.value("patience", cfg.ae.patience);
                cfg.ae.validation_fraction =
                    a.value("validation_fraction", cfg.ae.validation_fraction);
                cfg.ae.learning_rate = a.value("learning_rate", cfg.ae.learning_rate);
                cfg.ae.rho = a.value("rho", cfg.ae.rho);
                cfg.ae.epsilon = a.value("epsilon", cfg.ae.epsilon);
                cfg.ae.clip_norm = a.value("clip_norm", cfg.ae.clip_norm);
            }
            if (root.contains("simulate")) {
                const auto& s = root["simulate"];
                cfg.sim_spec_path = s.value("spec", "");
                cfg.sim_n_subjects = s.value("n_subjects", 0);
            }
            if (root.contains("predict")) {
                const auto& p = root["predict"];
                for (const auto& t : p.value("targets", json::array())) {
                    cfg.targets.push_back(
                        {t.at("name").get<std::string>(), parse_family(t.at("family"))});
                }
                if (p.contains("predictor_sets")) {
                    cfg.predictor_sets = p["predictor_sets"].get<std::vector<std::string>>();
                }
                cfg.n_rep = p.value("n_rep", cfg.n_rep);
                cfg.lambda_grid_size = p.value("lambda_grid_size", cfg.lambda_grid_size);
                cfg.lambda_min_ratio = p.value("lambda_min_ratio", cfg.lambda_min_ratio);
                cfg.use_pca = p.value("use_pca", cfg.use_pca);
            }
            if (root.contains("pls")) {
                const auto& p = root["pls"];
                cfg.pls_item = p.value("item", "");
                cfg.pls_target = p.value("target", "");
                cfg.pls_features = p.value("features", cfg.pls_features);
                cfg.pls_max_components = p.value("max_components", cfg.pls_max_components);
                cfg.pls_rmsep = p.value("rmsep", cfg.pls_rmsep);
                cfg.pls_cv_folds = p.value("cv_folds", cfg.pls_cv_folds);
            }
            if (root.contains("inspect")) {
                const auto& i = root["inspect"];
                cfg.inspect_item = i.value("item", "");
                cfg.inspect_target = i.value("target", "");
                cfg.inspect_interval = i.value("interval", cfg.inspect_interval);
                cfg.inspect_window = i.value("window", cfg.inspect_window);
                cfg.inspect_grid = i.value("grid_size", cfg.inspect_grid);
                cfg.inspect_span = i.value("span", cfg.inspect_span);
                for (const auto& p : i.value("patterns", json::array())) {
                    cfg.patterns.push_back({parse_pattern(p)});
                }
            }
        } catch (const json::exception& e) {
            throw ConfigError("config '" + path + "': " + e.what());
        }
    }

    if (ov.sequences) cfg.sequences_path = *ov.sequences;
    if (ov.covariates) cfg.covariates_path = *ov.covariates;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.method) cfg.feature_method = *ov.method;
    if (ov.k) cfg.k = *ov.k;
    if (ov.n_rep) cfg.n_rep = *ov.n_rep;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.target) {
        cfg.targets.clear();
        cfg.targets.push_back({*ov.target, parse_family(ov.family.value_or("gaussian"))});
    } else if (ov.family && !cfg.targets.empty()) {
        cfg.targets.front().family = parse_family(*ov.family);
    }
    if (ov.predictor_sets) {
        cfg.predictor_sets.clear();
        std::string cur;
        for (char c : *ov.predictor_sets + ",") {
            if (c == ',') {
                if (!cur.empty()) cfg.predictor_sets.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
    }

    if (cfg.k < 1) problems.push_back("k must be >= 1");
    if (cfg.n_rep < 1) problems.push_back("predict.n_rep must be >= 1");
    if (cfg.feature_method != "mds" && cfg.feature_method != "seq2seq" &&
        cfg.feature_method != "both") {
        problems.push_back("feature_method must be mds, seq2seq, or both");
    }
    for (const auto& set : cfg.predictor_sets) {
        if (set != "score" && set != "mds" && set != "seq2seq") {
            problems.push_back("predictor set '" + set + "' must be score, mds, or seq2seq");
        }
    }
    if (cfg.pls_rmsep != "insample" && cfg.pls_rmsep != "cv") {
        problems.push_back("pls.rmsep must be insample or cv");
    }
    if (cfg.pls_cv_folds < 2) problems.push_back("pls.cv_folds must be >= 2");
    if (cfg.inspect_interval < 1) problems.push_back("inspect.interval must be >= 1");
    if (cfg.inspect_span <= 0.0 || cfg.inspect_span > 1.0) {
        problems.push_back("inspect.span must lie in (0, 1]");
    }
    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
    cfg.mds.k = cfg.k;
    cfg.ae.k = cfg.k;
    cfg.ae.seed = cfg.seed;
    return cfg;
}

void artifact(const std::string& kind, const fs::path& path) {
    std::cout << "artifact\t" << kind << '\t' << path.string() << '\n';
}

fs::path out_path(const PipelineConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / name;
}

std::vector<Cohort> load_cohorts(const PipelineConfig& cfg) {
    if (cfg.sequences_path.empty()) throw ConfigError("paths.sequences is required");
    const auto format = cfg.sequences_path.ends_with(".csv") ? SequenceFormat::csv
                                                             : SequenceFormat::json_lines;
    auto cohorts = ingest_sequences(cfg.sequences_path, format);
    if (!cfg.strip_tokens_list.empty()) {
        for (auto& cohort : cohorts) cohort = strip_tokens(cohort, cfg.strip_tokens_list);
    }
    return cohorts;
}

CovariateTable load_covariates(const PipelineConfig& cfg) {
    if (cfg.covariates_path.empty()) throw ConfigError("paths.covariates is required");
    return read_covariates_csv(cfg.covariates_path);
}

std::string feature_file(const std::string& method, const std::string& item) {
    return "features_" + method + "_" + item + ".csv";
}

bool method_enabled(const PipelineConfig& cfg, const std::string& method) {
    return cfg.feature_method == method || cfg.feature_method == "both";
}

// Rows of `features` reordered to the requested subject ids.
FeatureMatrix align_to_subjects(const FeatureMatrix& features,
                                const std::vector<std::string>& ids) {
    std::map<std::string, int> row_of;
    for (std::size_t i = 0; i < features.subject_ids.size(); ++i) {
        row_of[features.subject_ids[i]] = static_cast<int>(i);
    }
    FeatureMatrix out;
    out.column_names = features.column_names;
    out.subject_ids = ids;
    out.values.resize(static_cast<long>(ids.size()), features.values.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = row_of.find(ids[i]);
        if (it == row_of.end()) {
            throw DataError("subject '" + ids[i] + "' has no feature row");
        }
        out.values.row(static_cast<long>(i)) = features.values.row(it->second);
    }
    return out;
}

FeatureMatrix score_features(const Cohort& cohort, const std::vector<std::string>& ids) {
    std::map<std::string, double> score_of;
    for (const auto& seq : cohort.sequences) {
        if (!seq.score) {
            throw DataError("subject '" + seq.subject_id + "' has no score on item '" +
                            cohort.item_id + "'");
        }
        score_of[seq.subject_id] = static_cast<double>(*seq.score);
    }
    FeatureMatrix m;
    m.subject_ids = ids;
    m.column_names = {"score_" + cohort.item_id};
    m.values.resize(static_cast<long>(ids.size()), 1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = score_of.find(ids[i]);
        if (it == score_of.end()) {
            throw DataError("subject '" + ids[i] + "' missing from item '" + cohort.item_id + "'");
        }
        m.values(static_cast<long>(i), 0) = it->second;
    }
    return m;
}

int run_simulate(const PipelineConfig& cfg) {
    if (cfg.sim_spec_path.empty()) throw ConfigError("simulate.spec is required");
    if (cfg.sim_n_subjects < 1) throw ConfigError("simulate.n_subjects must be >= 1");
    if (cfg.sequences_path.empty() || cfg.covariates_path.empty()) {
        throw ConfigError("paths.sequences and paths.covariates are required for simulate");
    }
    const AgentSpec spec = read_agent_spec(cfg.sim_spec_path);
    const SimResult result = generate(spec, cfg.sim_n_subjects, cfg.seed);
    for (const auto& target : {cfg.sequences_path, cfg.covariates_path}) {
        const fs::path parent = fs::path(target).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
    }
    emit_sequences_json_lines(cfg.sequences_path, result.cohorts);
    write_covariates_csv(cfg.covariates_path, result.covariates);
    artifact("sequences", cfg.sequences_path);
    artifact("covariates", cfg.covariates_path);
    return 0;
}

int run_ingest(const PipelineConfig& cfg) {
    const auto cohorts = load_cohorts(cfg);
    const auto path = out_path(cfg, "describe.csv");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "item_id,n_subjects,p,min_L,max_L,mean_L,n_action_types\n";
    for (const auto& cohort : cohorts) {
        const auto d = describe(cohort);
        out << d.item_id << ',' << d.n_subjects << ',' << format_double(d.p_full_credit) << ','
            << d.min_length << ',' << d.max_length << ',' << format_double(d.mean_length) << ','
            << d.n_action_types << '\n';
    }
    out.close();
    artifact("describe", path);
    return 0;
}

int run_dist(const PipelineConfig& cfg) {
    for (const auto& cohort : load_cohorts(cfg)) {
        const auto d = dissimilarity_matrix(cohort);
        const auto path = out_path(cfg, "dist_" + cohort.item_id + ".csv");
        write_dissimilarity_csv(path.string(), d);
        artifact("dissimilarity", path);
    }
    return 0;
}

int run_mds(const PipelineConfig& cfg) {
    const auto cohorts = load_cohorts(cfg);
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
        const auto d = dissimilarity_matrix(cohorts[i]);
        MdsConfig mds_cfg = cfg.mds;
        mds_cfg.seed = derive_seed(cfg.seed, i);
        const Embedding e = mds_embed(d, mds_cfg);
        const auto path = out_path(cfg, feature_file("mds", cohorts[i].item_id));
        write_feature_matrix_csv(path.string(), to_feature_matrix(e));
        artifact("features_mds", path);
    }
    return 0;
}

int run_ae_train(const PipelineConfig& cfg) {
    const auto cohorts = load_cohorts(cfg);
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
        AeConfig ae_cfg = cfg.ae;
        ae_cfg.seed = derive_seed(cfg.seed, 1000 + i);
        const TrainResult result = train(cohorts[i], ae_cfg);
        const auto ckpt = out_path(cfg, "ae_" + cohorts[i].item_id + ".ckpt");
        save_checkpoint(ckpt.string(), result.params, cohorts[i].vocabulary);
        artifact("checkpoint", ckpt);
        const auto log_path = out_path(cfg, "ae_log_" + cohorts[i].item_id + ".csv");
        write_training_log_csv(log_path.string(), result.log);
        artifact("training_log", log_path);
    }
    return 0;
}

int run_encode(const PipelineConfig& cfg) {
    for (const auto& cohort : load_cohorts(cfg)) {
        const auto ckpt = out_path(cfg, "ae_" + cohort.item_id + ".ckpt");
        auto [params, vocab] = load_checkpoint(ckpt.string());
        if (vocab.labels() != cohort.vocabulary.labels()) {
            throw DataError("checkpoint vocabulary does not match item '" + cohort.item_id + "'");
        }
        const auto path = out_path(cfg, feature_file("seq2seq", cohort.item_id));
        write_feature_matrix_csv(path.string(), encode_cohort(params, cohort));
        artifact("features_seq2seq", path);
    }
    return 0;
}

int run_pca(const PipelineConfig& cfg) {
    const auto cohorts = load_cohorts(cfg);
    for (const std::string method : {"mds", "seq2seq"}) {
        if (!method_enabled(cfg, method)) continue;
        for (const auto& cohort : cohorts) {
            const auto in_path = out_path(cfg, feature_file(method, cohort.item_id));
            const FeatureMatrix features = read_feature_matrix_csv(in_path.string());
            const auto [model, scores] = pca_fit_transform(features);
            const auto path = out_path(cfg, "pca_" + method + "_" + cohort.item_id + ".csv");
            write_feature_matrix_csv(path.string(), scores);
            artifact("pca_scores", path);

            const auto var_path =
                out_path(cfg, "pca_" + method + "_" + cohort.item_id + "_variance.csv");
            std::ofstream out(var_path);
            out << "component,explained_variance\n";
            for (long c = 0; c < model.explained_variance.size(); ++c) {
                out << c + 1 << ',' << format_double(model.explained_variance(c)) << '\n';
            }
            artifact("pca_variance", var_path);
        }
    }
    return 0;
}

// Feature matrix for one predictor set on one item, aligned to `ids`.
FeatureMatrix predictor_features(const PipelineConfig& cfg, const Cohort& cohort,
                                 const std::string& set, const std::vector<std::string>& ids) {
    if (set == "score") return score_features(cohort, ids);
    const auto path = out_path(cfg, feature_file(set, cohort.item_id));
    FeatureMatrix features = read_feature_matrix_csv(path.string());
    if (cfg.use_pca) features = pca_fit_transform(features).second;
    FeatureMatrix aligned = align_to_subjects(features, ids);
    // Tag columns with the item so cumulative concatenations stay unique.
    for (auto& name : aligned.column_names) name = cohort.item_id + "_" + name;
    return aligned;
}

std::pair<Eigen::VectorXd, std::vector<std::string>> target_values(const CovariateTable& cov,
                                                                   const TargetConfig& target) {
    const auto rows = casewise_filter(cov, target.name);
    if (rows.empty()) throw DataError("target '" + target.name + "' has no non-missing rows");
    const auto& col = cov.column(target.name);
    Eigen::VectorXd y(static_cast<long>(rows.size()));
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y(static_cast<long>(i)) = col.values[static_cast<std::size_t>(rows[i])];
        ids.push_back(cov.subject_ids()[static_cast<std::size_t>(rows[i])]);
    }
    if (target.family == Family::binomial) {
        // The two level codes map onto 0/1 deterministically (smaller -> 0).
        const double lo = y.minCoeff();
        const double hi = y.maxCoeff();
        if (lo == hi) throw DataError("binomial target '" + target.name + "' has one level");
        for (long i = 0; i < y.size(); ++i) y(i) = y(i) == lo ? 0.0 : 1.0;
    }
    return {std::move(y), std::move(ids)};
}

int run_predict(const PipelineConfig& cfg) {
    if (cfg.targets.empty()) throw ConfigError("predict.targets is required");
    const auto cohorts = load_cohorts(cfg);
    const auto cov = load_covariates(cfg);

    std::vector<PredictionReport> reports;
    for (const auto& target : cfg.targets) {
        const auto [y, ids] = target_values(cov, target);
        for (const auto& cohort : cohorts) {
            for (const auto& set : cfg.predictor_sets) {
                const FeatureMatrix x = predictor_features(cfg, cohort, set, ids);
                PredictionOptions opts;
                opts.target_name = target.name;
                opts.predictor_set = cohort.item_id + ":" + set;
                opts.lambda_grid_size = cfg.lambda_grid_size;
                opts.lambda_min_ratio = cfg.lambda_min_ratio;
                reports.push_back(
                    run_replications(x.values, y, target.family, cfg.n_rep, cfg.seed, opts));
            }
        }
    }
    const auto csv_path = out_path(cfg, "report_single.csv");
    write_report_csv(csv_path.string(), reports);
    artifact("report_single_csv", csv_path);
    const auto json_path = out_path(cfg, "report_single.json");
    write_report_json(json_path.string(), reports);
    artifact("report_single_json", json_path);
    return 0;
}

int run_cumulative(const PipelineConfig& cfg) {
    if (cfg.targets.empty()) throw ConfigError("predict.targets is required");
    const auto cohorts = load_cohorts(cfg);
    const auto cov = load_covariates(cfg);

    std::vector<PredictionReport> reports;
    for (const auto& target : cfg.targets) {
        const auto [y, ids] = target_values(cov, target);
        for (const auto& set : cfg.predictor_sets) {
            std::vector<FeatureMatrix> per_item;
            per_item.reserve(cohorts.size());
            for (const auto& cohort : cohorts) {
                per_item.push_back(predictor_features(cfg, cohort, set, ids));
            }
            PredictionOptions opts;
            opts.target_name = target.name;
            opts.predictor_set = set;
            opts.lambda_grid_size = cfg.lambda_grid_size;
            opts.lambda_min_ratio = cfg.lambda_min_ratio;
            auto step_reports =
                cumulative_predict(per_item, y, target.family, cfg.n_rep, cfg.seed, opts);
            reports.insert(reports.end(), step_reports.begin(), step_reports.end());
        }
    }
    const auto csv_path = out_path(cfg, "report_cumulative.csv");
    write_report_csv(csv_path.string(), reports);
    artifact("report_cumulative_csv", csv_path);
    const auto json_path = out_path(cfg, "report_cumulative.json");
    write_report_json(json_path.string(), reports);
    artifact("report_cumulative_json", json_path);
    return 0;
}

const Cohort& find_cohort(const std::vector<Cohort>& cohorts, const std::string& item) {
    if (item.empty()) return cohorts.front();
    for (const auto& c : cohorts) {
        if (c.item_id == item) return c;
    }
    throw DataError("item '" + item + "' not present in the sequence file");
}

PlsModel fit_pls_for(const PipelineConfig& cfg, const Cohort& cohort, const std::string& target,
                     const std::string& features_kind, FeatureMatrix* x_out,
                     Eigen::VectorXd* y_out, std::vector<std::string>* ids_out) {
    const auto cov = load_covariates(cfg);
    const TargetConfig tc{target, Family::gaussian};
    const auto [y, ids] = target_values(cov, tc);
    const auto path = out_path(cfg, feature_file(features_kind, cohort.item_id));
    const FeatureMatrix features = align_to_subjects(read_feature_matrix_csv(path.string()), ids);
    const int max_m = std::min<int>(cfg.pls_max_components, static_cast<int>(ids.size()) - 1);
    PlsModel model = pls_fit(features, y, max_m);
    if (x_out) *x_out = features;
    if (y_out) *y_out = y;
    if (ids_out) *ids_out = ids;
    return model;
}

int run_pls(const PipelineConfig& cfg) {
    if (cfg.pls_target.empty()) throw ConfigError("pls.target is required");
    const auto cohorts = load_cohorts(cfg);
    const Cohort& cohort = find_cohort(cohorts, cfg.pls_item);

    FeatureMatrix x;
    Eigen::VectorXd y;
    const PlsModel model =
        fit_pls_for(cfg, cohort, cfg.pls_target, cfg.pls_features, &x, &y, nullptr);

    // Component count from the configured curve: the in-sample formula by
    // default, K-fold out-of-fold RMSEP behind the cv flag.
    std::vector<double> curve = model.rmsep;
    int selected = model.selected_m;
    if (cfg.pls_rmsep == "cv") {
        curve = rmsep_cv(x, y, static_cast<int>(model.weights.cols()), cfg.pls_cv_folds, cfg.seed);
        selected = one_se_select(curve);
    }

    const auto scores_path =
        out_path(cfg, "pls_scores_" + cohort.item_id + "_" + cfg.pls_target + ".csv");
    write_feature_matrix_csv(scores_path.string(), pls_scores(model, x, selected));
    artifact("pls_scores", scores_path);

    const auto rmsep_path =
        out_path(cfg, "pls_rmsep_" + cohort.item_id + "_" + cfg.pls_target + ".csv");
    std::ofstream out(rmsep_path);
    out << "m,rmsep\n";
    for (std::size_t m = 0; m < curve.size(); ++m) {
        out << m + 1 << ',' << format_double(curve[m]) << '\n';
    }
    out.close();
    artifact("pls_rmsep", rmsep_path);
    std::cout << "summary\tpls_selected_m\t" << selected << '\n';
    return 0;
}

int run_inspect(const PipelineConfig& cfg) {
    if (cfg.inspect_target.empty()) throw ConfigError("inspect.target is required");
    const auto cohorts = load_cohorts(cfg);
    const Cohort& cohort = find_cohort(cohorts, cfg.inspect_item);

    FeatureMatrix x;
    Eigen::VectorXd y;
    std::vector<std::string> ids;
    const PlsModel model =
        fit_pls_for(cfg, cohort, cfg.inspect_target, cfg.pls_features, &x, &y, &ids);
    const FeatureMatrix scores = pls_scores(model, x, 1);

    // Restrict the cohort to the target's case-wise filtered subjects, in
    // score-row order.
    std::map<std::string, const ActionSequence*> by_id;
    for (const auto& seq : cohort.sequences) by_id[seq.subject_id] = &seq;
    std::vector<ActionSequence> kept;
    kept.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("subject '" + id + "' missing from item");
        kept.push_back(*it->second);
    }
    const Cohort filtered = make_cohort(cohort.item_id, kept);

    std::vector<double> component(static_cast<std::size_t>(scores.values.rows()));
    for (long i = 0; i < scores.values.rows(); ++i) {
        component[static_cast<std::size_t>(i)] = scores.values(i, 0);
    }
    std::vector<double> variable(static_cast<std::size_t>(y.size()));
    for (long i = 0; i < y.size(); ++i) variable[static_cast<std::size_t>(i)] = y(i);

    const auto rank_path =
        out_path(cfg, "inspect_" + cohort.item_id + "_" + cfg.inspect_target + ".txt");
    write_rank_export(rank_path.string(), rank_export(filtered, component, cfg.inspect_interval));
    artifact("inspect_ranked", rank_path);

    const LowessFit curve = component_variable_curve(component, variable, cfg.inspect_span);
    for (const auto& pattern : cfg.patterns) {
        const auto series = pattern_series(filtered, component, pattern.spec, cfg.inspect_grid,
                                           cfg.inspect_window);
        const auto plot_path = out_path(cfg, "plot_" + cohort.item_id + "_" + cfg.inspect_target +
                                                 "_" + pattern.spec.label + ".csv");
        write_plot_csv(plot_path.string(), series, curve, cfg.inspect_span);
        artifact("plot_data", plot_path);
    }
    return 0;
}

int run_all(const PipelineConfig& cfg) {
    if (!cfg.sim_spec_path.empty()) run_simulate(cfg);
    run_ingest(cfg);
    run_dist(cfg);
    if (method_enabled(cfg, "mds")) run_mds(cfg);
    if (method_enabled(cfg, "seq2seq")) {
        run_ae_train(cfg);
        run_encode(cfg);
    }
    run_pca(cfg);
    if (!cfg.targets.empty()) {
        run_predict(cfg);
        run_cumulative(cfg);
    }
    if (!cfg.pls_target.empty()) run_pls(cfg);
    if (!cfg.inspect_target.empty()) run_inspect(cfg);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"seqfeat: action-sequence feature extraction and covariate association toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("-c,--config", config_path, "pipeline config (json)");

    std::string seq_override, cov_override, out_override, method_override;
    int k_override = -1, nrep_override = -1;
    std::int64_t seed_override = -1;
    app.add_option("--sequences", seq_override, "override paths.sequences");
    app.add_option("--covariates", cov_override, "override paths.covariates");
    app.add_option("--out-dir", out_override, "override paths.out_dir");
    app.add_option("--method", method_override, "override feature_method");
    app.add_option("--k", k_override, "override feature dimension K");
    app.add_option("--n-rep", nrep_override, "override replication count");
    app.add_option("--seed", seed_override, "override master seed");
    std::string target_override, family_override, sets_override;
    app.add_option("--target", target_override, "override prediction target name");
    app.add_option("--family", family_override, "override target family (gaussian|binomial)");
    app.add_option("--predictor-sets", sets_override,
                   "override predictor sets (comma-separated: score,mds,seq2seq)");

    for (const char* name : {"simulate", "ingest", "dist", "mds", "ae-train", "encode", "pca",
                             "predict", "cumulative", "pls", "inspect", "all"}) {
        app.add_subcommand(name)->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    Overrides ov;
    if (!seq_override.empty()) ov.sequences = seq_override;
    if (!cov_override.empty()) ov.covariates = cov_override;
    if (!out_override.empty()) ov.out_dir = out_override;
    if (!method_override.empty()) ov.method = method_override;
    if (k_override > 0) ov.k = k_override;
    if (nrep_override > 0) ov.n_rep = nrep_override;
    if (seed_override >= 0) ov.seed = static_cast<std::uint64_t>(seed_override);
    if (!target_override.empty()) ov.target = target_override;
    if (!family_override.empty()) ov.family = family_override;
    if (!sets_override.empty()) ov.predictor_sets = sets_override;

    try {
        const PipelineConfig cfg = load_config(config_path, ov);
        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "simulate") return run_simulate(cfg);
        if (sub == "ingest") return run_ingest(cfg);
        if (sub == "dist") return run_dist(cfg);
        if (sub == "mds") return run_mds(cfg);
        if (sub == "ae-train") return run_ae_train(cfg);
        if (sub == "encode") return run_encode(cfg);
        if (sub == "pca") return run_pca(cfg);
        if (sub == "predict") return run_predict(cfg);
        if (sub == "cumulative") return run_cumulative(cfg);
        if (sub == "pls") return run_pls(cfg);
        if (sub == "inspect") return run_inspect(cfg);
        if (sub == "all") return run_all(cfg);
        std::cerr << "error: unknown subcommand '" << sub << "'\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
