// ksurv: kernel survival analysis pipelines.
//
// One binary with subcommands: synth (generate data with known ground
// truth), fit (learn an embedding kernel), predict (survival curves and
// times), intervals (conformal prediction sets), evaluate (concordance and
// coverage experiments). Every command writes a manifest echoing its full
// resolved configuration; all randomness flows from --seed.

#include <CLI11.hpp>
#include <json.hpp>

#include "ksa/conformal.hpp"
#include "ksa/csv.hpp"
#include "ksa/cv.hpp"
#include "ksa/estimator.hpp"
#include "ksa/eval.hpp"
#include "ksa/kernel.hpp"
#include "ksa/mds.hpp"
#include "ksa/model_io.hpp"
#include "ksa/synthetic.hpp"
#include "ksa/train.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using nlohmann::json;
namespace fs = std::filesystem;
using namespace ksa;

namespace {

json num_or_inf(double v) {
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    return json(v);
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        auto comma = csv.find(',', start);
        if (comma == std::string::npos) comma = csv.size();
        if (comma > start) out.push_back(csv.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::vector<double> parse_alphas(const std::string& csv) {
    std::vector<double> out;
    for (const auto& item : split_list(csv)) out.push_back(std::stod(item));
    if (out.empty()) throw CLI::ValidationError("--alpha", "needs at least one level");
    return out;
}

struct SchemaFlags {
    std::string time_col = "time";
    std::string event_col = "event";
    std::string features;  // comma list; empty = all other header columns
    bool standardize = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--time-col", time_col, "Observed-time column name");
        cmd->add_option("--event-col", event_col, "Event-indicator column name");
        cmd->add_option("--features", features,
                        "Comma-separated feature columns (default: all others)");
    }

    CsvSchema resolve(const std::string& path,
                      const std::optional<Standardization>& reuse = std::nullopt) const {
        CsvSchema schema;
        schema.time_column = time_col;
        schema.event_column = event_col;
        if (features.empty()) {
            for (const auto& col : csv_header(path))
                if (col != time_col && col != event_col) schema.feature_columns.push_back(col);
        } else {
            schema.feature_columns = split_list(features);
        }
        schema.standardize = standardize;
        schema.reuse = reuse;
        return schema;
    }

    json to_json() const {
        return {{"time_col", time_col},
                {"event_col", event_col},
                {"features", features.empty() ? "(all)" : features},
                {"standardize", standardize}};
    }
};

std::shared_ptr<const Kernel> make_query_kernel(const std::string& spec,
                                                const ModelFile& model,
                                                const SurvivalDataset& train) {
    if (spec == "learned") return std::make_shared<GaussianEmbeddingKernel>(model.net);
    if (spec == "constant") return std::make_shared<ConstantKernel>();
    if (spec.rfind("box:", 0) == 0) return std::make_shared<BoxKernel>(std::stod(spec.substr(4)));
    if (spec.rfind("precomputed:", 0) == 0) {
        auto kernel = load_kernel_matrix(spec.substr(12));
        kernel->bind(train);
        return kernel;
    }
    throw CLI::ValidationError("--kernel", "expected learned, constant, box:SIGMA, or "
                                           "precomputed:PATH");
}

// Training data in the model's time representation: snapped onto the stored
// grid when that grid is quantized.
SurvivalDataset model_train_data(const ModelFile& model, const std::string& train_path,
                                 const SchemaFlags& schema_flags) {
    const auto schema = schema_flags.resolve(train_path, model.standardization);
    SurvivalDataset train = load_csv(train_path, schema);
    if (train.feature_dim() != model.net.input_dim())
        throw std::runtime_error("training file feature count does not match the model");
    return model.grid.quantized ? snap_to_grid(train, model.grid) : train;
}

json curve_json(const SurvivalCurve& curve) {
    return {{"times", curve.grid.times}, {"survival", curve.values}};
}

int cmd_synth(const std::string& model_name, std::size_t n, std::size_t d, double censor,
              std::uint64_t seed, const std::string& out_dir) {
    SyntheticSpec spec;
    spec.n = n;
    spec.d = d;
    spec.censoring_rate_target = censor;
    spec.seed = seed;
    spec.hazard_model = model_name == "clusters" ? HazardModel::TwoClusterWeibull
                                                 : HazardModel::ExponentialRate;
    const auto data = generate_synthetic(spec);

    fs::create_directories(out_dir);
    write_csv((fs::path(out_dir) / "data.csv").string(), data.dataset);

    json manifest;
    manifest["command"] = "synth";
    manifest["model"] = model_name;
    manifest["n"] = n;
    manifest["d"] = d;
    manifest["censoring_target"] = censor;
    manifest["seed"] = seed;
    manifest["realized_censored_fraction"] = data.dataset.censored_fraction();
    manifest["censoring_rate"] = data.censoring_rate;
    if (spec.hazard_model == HazardModel::ExponentialRate) {
        manifest["ground_truth"] = "S(t|x) = exp(-t * exp(beta . x)), beta = e1";
    } else {
        manifest["ground_truth"] =
            "two clusters on x1; Weibull(shape 1.5, scale 2 or 8) by cluster";
    }
    write_json(fs::path(out_dir) / "manifest.json", manifest);
    std::cout << "wrote " << out_dir << "/data.csv (" << n << " rows, censored fraction "
              << data.dataset.censored_fraction() << ")\n";
    return 0;
}

struct FitFlags {
    std::string train_path;
    SchemaFlags schema;
    std::string arch = "basic";
    int hidden_layers = 1;
    int hidden_width = 32;
    double lambda = 0.1;
    int epochs = 20;
    int batch = 64;
    double lr = 0.01;
    int m_times = 0;  // 0 = all unique times
    std::string warm_start_path;
    bool cv = false;
    std::string select = "ctd";
    int jobs = 1;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int cmd_fit(const FitFlags& f) {
    const auto schema = f.schema.resolve(f.train_path);
    SurvivalDataset data = load_csv(f.train_path, schema);
    const Arch arch = arch_from_name(f.arch);

    TrainConfig config;
    config.epochs = f.epochs;
    config.batch_size = f.batch;
    config.learning_rate = f.lr;
    config.seed = f.seed;
    if (f.m_times > 0) config.grid_points = static_cast<std::size_t>(f.m_times);
    MLPSpec mlp{f.hidden_layers, f.hidden_width};

    fs::create_directories(f.out_dir);
    json manifest;
    manifest["command"] = "fit";
    manifest["train"] = f.train_path;
    manifest["schema"] = f.schema.to_json();
    manifest["arch"] = f.arch;
    manifest["lambda"] = f.lambda;
    manifest["seed"] = f.seed;
    manifest["cv"] = f.cv;
    manifest["warm_start"] = f.warm_start_path;

    if (f.cv) {
        CvOptions options;
        options.select = f.select == "loss" ? CvSelect::Loss : CvSelect::Ctd;
        options.lambda = f.lambda;
        options.seed = f.seed;
        options.jobs = f.jobs;
        const CvResult result = cross_validate(arch, data, options);
        const auto& best = result.candidates[result.best_index];
        config.epochs = best.config.epochs;
        config.batch_size = best.config.batch_size;
        config.learning_rate = best.config.learning_rate;
        config.grid_points = best.config.grid_points;
        mlp = best.mlp;

        std::ofstream cv_csv(fs::path(f.out_dir) / "cv_results.csv");
        cv_csv.precision(17);
        cv_csv << "candidate,settings,mean_ctd,mean_loss,selected\n";
        for (std::size_t ci = 0; ci < result.candidates.size(); ++ci)
            cv_csv << ci << ",\"" << result.candidates[ci].describe() << "\","
                   << result.mean_ctd[ci] << ',' << result.mean_loss[ci] << ','
                   << (ci == result.best_index ? 1 : 0) << '\n';
        manifest["cv_selected"] = best.describe();
        manifest["cv_select_metric"] = f.select;
        std::cout << "cv selected: " << best.describe() << "\n";
    }

    EmbeddingNet net = make_net(arch, static_cast<int>(data.feature_dim()), mlp, f.lambda,
                                f.seed);

    if (!f.warm_start_path.empty()) {
        auto precomputed = load_kernel_matrix(f.warm_start_path);
        if (precomputed->values().rows() != static_cast<Eigen::Index>(data.size()))
            throw std::runtime_error("warm-start kernel matrix size does not match the "
                                     "training data");
        KernelMatrix km;
        km.values = precomputed->values();
        km.row_source = f.warm_start_path;
        km.col_source = f.warm_start_path;
        const auto mds = mds_embed(km, static_cast<std::size_t>(data.feature_dim()));
        const auto warmed = warm_start(std::move(net), data, mds.points, config);
        net = warmed.net;
        manifest["warm_start_mds_stress"] = mds.stress;
        manifest["warm_start_final_mse"] = warmed.epoch_mse.back();
    }

    const TrainResult run = train(std::move(net), data, config);

    ModelFile model;
    model.net = run.net;
    model.grid = run.grid;
    model.standardization = data.standardization();
    model.feature_names = schema.feature_columns;
    save_model((fs::path(f.out_dir) / "model.json").string(), model);

    manifest["config"] = {{"epochs", config.epochs},
                          {"batch", config.batch_size},
                          {"lr", config.learning_rate},
                          {"m_times", config.grid_points ? json(*config.grid_points)
                                                         : json("all")},
                          {"hidden_layers", mlp.hidden_layers},
                          {"hidden_width", mlp.hidden_width}};
    manifest["training"] = {{"epoch_losses", run.epoch_losses},
                            {"grid_size", run.grid.size()}};
    write_json(fs::path(f.out_dir) / "manifest.json", manifest);
    std::cout << "wrote " << f.out_dir << "/model.json (final epoch loss "
              << (run.epoch_losses.empty() ? 0.0 : run.epoch_losses.back()) << ")\n";
    return 0;
}

struct PredictFlags {
    std::string model_path, train_path, query_path;
    SchemaFlags schema;
    std::string kernel = "learned";
    std::string time_estimator = "median";
    double horizon = -1.0;
    std::string out_dir;
};

int cmd_predict(const PredictFlags& f) {
    const ModelFile model = load_model(f.model_path);
    const SurvivalDataset train = model_train_data(model, f.train_path, f.schema);
    auto kernel = make_query_kernel(f.kernel, model, train);
    const auto fit = std::make_shared<FittedConditionalKM>(train, kernel, model.grid,
                                                           model.epsilon);

    const auto feature_cols = !model.feature_names.empty()
                                  ? model.feature_names
                                  : f.schema.resolve(f.query_path).feature_columns;
    const Eigen::MatrixXd queries =
        load_feature_csv(f.query_path, feature_cols, model.standardization);

    const bool use_mean = f.time_estimator == "mean";
    const double horizon = f.horizon > 0 ? f.horizon : model.grid.times.back();

    json rows = json::array();
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        const SurvivalCurve curve = fit->predict(queries.row(i));
        const double estimate = use_mean ? mean_survival_time(curve, horizon)
                                         : median_survival_time(curve);
        rows.push_back({{"index", i},
                        {"curve", curve_json(curve)},
                        {"time_estimate", num_or_inf(estimate)}});
    }

    fs::create_directories(f.out_dir);
    json out;
    out["estimator"] = use_mean ? "mean" : "median";
    if (use_mean) out["horizon"] = horizon;
    out["queries"] = std::move(rows);
    write_json(fs::path(f.out_dir) / "predictions.json", out);

    json manifest;
    manifest["command"] = "predict";
    manifest["model"] = f.model_path;
    manifest["train"] = f.train_path;
    manifest["query"] = f.query_path;
    manifest["schema"] = f.schema.to_json();
    manifest["kernel"] = f.kernel;
    manifest["time_estimator"] = f.time_estimator;
    manifest["horizon"] = f.horizon;
    write_json(fs::path(f.out_dir) / "manifest.json", manifest);
    std::cout << "wrote " << f.out_dir << "/predictions.json (" << queries.rows()
              << " queries)\n";
    return 0;
}

struct IntervalFlags {
    std::string model_path, train_path, calib_path, query_path;
    SchemaFlags schema;
    std::string alphas = "0.2";
    std::string mode = "marginal";
    std::string center;
    std::string kernel = "learned";
    std::string time_estimator = "median";
    double horizon = -1.0;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int cmd_intervals(const IntervalFlags& f) {
    const ModelFile model = load_model(f.model_path);
    const SurvivalDataset train = model_train_data(model, f.train_path, f.schema);
    auto kernel = make_query_kernel(f.kernel, model, train);
    const auto fit = std::make_shared<FittedConditionalKM>(train, kernel, model.grid,
                                                           model.epsilon);
    const auto estimator = make_time_estimator(
        fit, f.time_estimator == "mean" ? TimeEstimate::Mean : TimeEstimate::Median,
        f.horizon > 0 ? std::optional<double>(f.horizon) : std::nullopt);

    const auto calib_schema = f.schema.resolve(f.calib_path, model.standardization);
    const SurvivalDataset calib = load_csv(f.calib_path, calib_schema);
    if (calib.empty()) throw std::runtime_error("calibration file is empty");
    const CalibrationScores scores = calibrate(estimator, calib);

    const auto feature_cols = !model.feature_names.empty()
                                  ? model.feature_names
                                  : calib_schema.feature_columns;
    const Eigen::MatrixXd queries =
        load_feature_csv(f.query_path, feature_cols, model.standardization);

    const bool local = f.mode == "local";
    Eigen::VectorXd center;
    if (local) {
        if (f.center.empty())
            throw CLI::ValidationError("--center", "required in local mode");
        if (f.center.find(',') == std::string::npos &&
            f.center.find_first_not_of("0123456789") == std::string::npos) {
            const auto idx = std::stoul(f.center);
            if (idx >= static_cast<std::size_t>(queries.rows()))
                throw std::runtime_error("--center index is out of range");
            center = queries.row(static_cast<Eigen::Index>(idx));
        } else {
            const auto parts = split_list(f.center);
            center.resize(static_cast<Eigen::Index>(parts.size()));
            for (std::size_t k = 0; k < parts.size(); ++k)
                center[static_cast<Eigen::Index>(k)] = std::stod(parts[k]);
            if (model.standardization) {
                center -= model.standardization->mean;
                center = center.cwiseQuotient(model.standardization->scale);
            }
        }
    }

    const auto alphas = parse_alphas(f.alphas);
    fs::create_directories(f.out_dir);
    json rows = json::array();
    std::ofstream csv(fs::path(f.out_dir) / "intervals.csv");
    csv.precision(17);
    csv << "query,alpha,center,radius,observed_lo,observed_hi,censored_hi\n";
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        const double t_hat = estimator(queries.row(i));
        for (double alpha : alphas) {
            const double q = local
                                 ? local_quantile(scores, *kernel, queries.row(i), center,
                                                  alpha, f.seed)
                                 : marginal_quantile(scores, alpha, f.seed);
            const auto set = prediction_set(t_hat, q);
            rows.push_back({{"query", i},
                            {"alpha", alpha},
                            {"center", set.center},
                            {"radius", num_or_inf(set.radius)},
                            {"observed", {set.observed_lo, num_or_inf(set.observed_hi)}},
                            {"censored", {0.0, num_or_inf(set.censored_hi)}}});
            csv << i << ',' << alpha << ',' << set.center << ',' << set.radius << ','
                << set.observed_lo << ',' << set.observed_hi << ',' << set.censored_hi
                << '\n';
        }
    }

    json out;
    out["mode"] = f.mode;
    out["intervals"] = std::move(rows);
    write_json(fs::path(f.out_dir) / "intervals.json", out);

    json manifest;
    manifest["command"] = "intervals";
    manifest["model"] = f.model_path;
    manifest["train"] = f.train_path;
    manifest["calib"] = f.calib_path;
    manifest["query"] = f.query_path;
    manifest["schema"] = f.schema.to_json();
    manifest["alpha"] = f.alphas;
    manifest["mode"] = f.mode;
    manifest["center"] = f.center;
    manifest["kernel"] = f.kernel;
    manifest["seed"] = f.seed;
    write_json(fs::path(f.out_dir) / "manifest.json", manifest);
    std::cout << "wrote " << f.out_dir << "/intervals.json\n";
    return 0;
}

struct EvaluateFlags {
    std::string model_path, train_path, test_path;
    SchemaFlags schema;
    std::string metric = "ctd";
    std::string alphas = "0.2";
    int reps = 100;
    double calib_fraction = 1.0;
    std::string kernel = "learned";
    std::uint64_t seed = 0;
    std::string out_dir;
};

int cmd_evaluate(const EvaluateFlags& f) {
    const ModelFile model = load_model(f.model_path);
    const SurvivalDataset train = model_train_data(model, f.train_path, f.schema);
    auto kernel = make_query_kernel(f.kernel, model, train);
    const auto fit = std::make_shared<FittedConditionalKM>(train, kernel, model.grid,
                                                           model.epsilon);
    const auto estimator = make_time_estimator(fit);

    const auto test_schema = f.schema.resolve(f.test_path, model.standardization);
    const SurvivalDataset test = load_csv(f.test_path, test_schema);

    fs::create_directories(f.out_dir);
    json report;
    report["metric"] = f.metric;
    std::ofstream csv(fs::path(f.out_dir) / "report.csv");
    csv.precision(17);
    std::ofstream timings(fs::path(f.out_dir) / "timings.csv");
    timings.precision(6);

    if (f.metric == "ctd") {
        std::vector<SurvivalCurve> curves;
        curves.reserve(test.size());
        for (std::size_t i = 0; i < test.size(); ++i)
            curves.push_back(fit->predict(test.feature_row(i)));
        const auto r = ctd_with_bootstrap(curves, test, f.reps, f.seed);
        report["ctd"] = r.ctd;
        report["comparable_pairs"] = r.comparable_pairs;
        report["bootstrap_95"] = {r.bootstrap95->first, r.bootstrap95->second};
        csv << "metric,value,ci_lo,ci_hi,comparable_pairs\n";
        csv << "ctd," << r.ctd << ',' << r.bootstrap95->first << ',' << r.bootstrap95->second
            << ',' << r.comparable_pairs << '\n';
        std::cout << "ctd = " << r.ctd << " [" << r.bootstrap95->first << ", "
                  << r.bootstrap95->second << "]\n";
    } else if (f.metric == "marginal-coverage" || f.metric == "local-coverage") {
        const bool local = f.metric == "local-coverage";
        csv << (local ? "alpha,rep,center_row,coverage\n" : "alpha,rep,coverage,width\n");
        timings << "alpha,rep,seconds\n";
        json per_alpha = json::array();
        for (double alpha : parse_alphas(f.alphas)) {
            const CoverageReport r =
                local ? local_coverage_experiment(estimator, *kernel, test, alpha, f.reps,
                                                  f.seed)
                      : marginal_coverage_experiment(estimator, test, alpha, f.reps,
                                                     f.calib_fraction, f.seed);
            for (std::size_t k = 0; k < r.coverages.size(); ++k) {
                if (local)
                    csv << alpha << ',' << r.rep_index[k] << ',' << r.center_rows[k] << ','
                        << r.coverages[k] << '\n';
                else
                    csv << alpha << ',' << r.rep_index[k] << ',' << r.coverages[k] << ','
                        << r.widths[k] << '\n';
            }
            for (std::size_t k = 0; k < r.rep_seconds.size(); ++k)
                timings << alpha << ',' << k << ',' << r.rep_seconds[k] << '\n';
            json summary;
            summary["alpha"] = alpha;
            summary["target"] = r.target;
            summary["mean_coverage"] = r.mean_coverage;
            summary["std_coverage"] = r.std_coverage;
            summary["redrawn_or_skipped"] = r.redrawn;
            if (local) {
                summary["width_median"] = num_or_inf(r.width_median);
                summary["width_quartile_dev"] = num_or_inf(r.width_quartile_dev);
            } else {
                summary["width_mean"] = num_or_inf(r.width_mean);
                summary["width_std"] = num_or_inf(r.width_std);
            }
            per_alpha.push_back(std::move(summary));
            std::cout << f.metric << " alpha=" << alpha << ": mean coverage "
                      << r.mean_coverage << "\n";
        }
        report["results"] = std::move(per_alpha);
    } else {
        throw CLI::ValidationError("--metric", "expected ctd, marginal-coverage, or "
                                               "local-coverage");
    }
    write_json(fs::path(f.out_dir) / "report.json", report);

    json manifest;
    manifest["command"] = "evaluate";
    manifest["model"] = f.model_path;
    manifest["train"] = f.train_path;
    manifest["test"] = f.test_path;
    manifest["schema"] = f.schema.to_json();
    manifest["metric"] = f.metric;
    manifest["alpha"] = f.alphas;
    manifest["reps"] = f.reps;
    manifest["calib_fraction"] = f.calib_fraction;
    manifest["kernel"] = f.kernel;
    manifest["seed"] = f.seed;
    write_json(fs::path(f.out_dir) / "manifest.json", manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel survival analysis: learned kernels, conditional Kaplan-Meier "
                 "curves, and conformal survival-time intervals"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate synthetic survival data");
    std::string synth_model = "exp";
    std::size_t synth_n = 1000, synth_d = 2;
    double synth_censor = 0.0;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--model", synth_model, "exp or clusters")
        ->check(CLI::IsMember({"exp", "clusters"}));
    synth->add_option("--n", synth_n, "Sample count");
    synth->add_option("--d", synth_d, "Feature dimension");
    synth->add_option("--censor", synth_censor, "Target censored fraction in [0,1)");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--out", synth_out, "Output directory")->required();

    auto* fit = app.add_subcommand("fit", "Learn an embedding kernel from training data");
    FitFlags ff;
    fit->add_option("--train", ff.train_path, "Training CSV")->required();
    ff.schema.attach(fit);
    fit->add_flag("--standardize", ff.schema.standardize,
                  "Standardize feature columns (statistics stored in the model)");
    fit->add_option("--arch", ff.arch, "basic, diag, res-basic, res-diag, or mlp")
        ->check(CLI::IsMember({"basic", "diag", "res-basic", "res-diag", "mlp"}));
    fit->add_option("--hidden-layers", ff.hidden_layers, "MLP hidden layers");
    fit->add_option("--hidden-width", ff.hidden_width, "MLP hidden width");
    fit->add_option("--lambda", ff.lambda, "Residual mixing weight");
    fit->add_option("--epochs", ff.epochs, "Training epochs");
    fit->add_option("--batch", ff.batch, "Mini-batch size");
    fit->add_option("--lr", ff.lr, "Adam learning rate");
    fit->add_option("--m-times", ff.m_times, "Quantized time-grid size (0 = all unique)");
    fit->add_option("--warm-start", ff.warm_start_path,
                    "Precomputed kernel matrix CSV for MDS warm-starting");
    bool no_cv = false;
    fit->add_flag("--cv", ff.cv, "5-fold cross-validation over the hyperparameter grid");
    fit->add_flag("--no-cv", no_cv, "Skip cross-validation (default)");
    fit->add_option("--select", ff.select, "CV selection metric: ctd or loss")
        ->check(CLI::IsMember({"ctd", "loss"}));
    fit->add_option("--jobs", ff.jobs, "Parallel CV fits");
    fit->add_option("--seed", ff.seed, "RNG seed");
    fit->add_option("--out", ff.out_dir, "Output directory")->required();

    auto* predict = app.add_subcommand("predict", "Survival curves and times per query row");
    PredictFlags pf;
    predict->add_option("--model", pf.model_path, "Model JSON from fit")->required();
    predict->add_option("--train", pf.train_path, "Training CSV used by fit")->required();
    predict->add_option("--query", pf.query_path, "Query CSV (feature columns)")->required();
    pf.schema.attach(predict);
    predict->add_option("--kernel", pf.kernel,
                        "learned, constant, box:SIGMA, or precomputed:PATH");
    predict->add_option("--time-estimator", pf.time_estimator, "median or mean")
        ->check(CLI::IsMember({"median", "mean"}));
    predict->add_option("--horizon", pf.horizon, "Mean-estimator integration horizon");
    predict->add_option("--out", pf.out_dir, "Output directory")->required();

    auto* intervals =
        app.add_subcommand("intervals", "Conformal prediction sets for survival times");
    IntervalFlags itf;
    intervals->add_option("--model", itf.model_path, "Model JSON from fit")->required();
    intervals->add_option("--train", itf.train_path, "Training CSV used by fit")->required();
    intervals->add_option("--calib", itf.calib_path, "Calibration CSV")->required();
    intervals->add_option("--query", itf.query_path, "Query CSV")->required();
    itf.schema.attach(intervals);
    intervals->add_option("--alpha", itf.alphas, "Comma-separated miscoverage levels");
    intervals->add_option("--mode", itf.mode, "marginal or local")
        ->check(CLI::IsMember({"marginal", "local"}));
    intervals->add_option("--center", itf.center, "Local center: query INDEX or VECTOR");
    intervals->add_option("--kernel", itf.kernel,
                          "learned, constant, box:SIGMA, or precomputed:PATH");
    intervals->add_option("--time-estimator", itf.time_estimator, "median or mean")
        ->check(CLI::IsMember({"median", "mean"}));
    intervals->add_option("--horizon", itf.horizon, "Mean-estimator integration horizon");
    intervals->add_option("--seed", itf.seed, "RNG seed");
    intervals->add_option("--out", itf.out_dir, "Output directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Concordance and coverage experiments");
    EvaluateFlags ef;
    evaluate->add_option("--model", ef.model_path, "Model JSON from fit")->required();
    evaluate->add_option("--train", ef.train_path, "Training CSV used by fit")->required();
    evaluate->add_option("--test", ef.test_path, "Held-out test CSV")->required();
    ef.schema.attach(evaluate);
    evaluate->add_option("--metric", ef.metric, "ctd, marginal-coverage, or local-coverage");
    evaluate->add_option("--alpha", ef.alphas, "Comma-separated miscoverage levels");
    evaluate->add_option("--reps", ef.reps, "Repetitions (bootstrap or experiment)");
    evaluate->add_option("--calib-fraction", ef.calib_fraction,
                         "Fraction of the calibration half to use");
    evaluate->add_option("--kernel", ef.kernel,
                         "learned, constant, box:SIGMA, or precomputed:PATH");
    evaluate->add_option("--seed", ef.seed, "RNG seed");
    evaluate->add_option("--out", ef.out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth)
            return cmd_synth(synth_model, synth_n, synth_d, synth_censor, synth_seed,
                             synth_out);
        if (*fit) return cmd_fit(ff);
        if (*predict) return cmd_predict(pf);
        if (*intervals) return cmd_intervals(itf);
        if (*evaluate) return cmd_evaluate(ef);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
