#include "ksa/cv.hpp"

#include "ksa/estimator.hpp"
#include "ksa/eval.hpp"
#include "ksa/loss.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ksa {

std::string CvCandidate::describe() const {
    std::ostringstream out;
    out << "epochs=" << config.epochs << " batch=" << config.batch_size
        << " lr=" << config.learning_rate;
    if (config.grid_points)
        out << " m=" << *config.grid_points;
    else
        out << " m=all";
    out << " layers=" << mlp.hidden_layers << " width=" << mlp.hidden_width;
    return out.str();
}

std::vector<CvCandidate> search_grid(Arch arch) {
    const int epochs[] = {10, 20};
    const int batches[] = {64, 128};
    const double rates[] = {0.01, 0.001};
    const std::optional<std::size_t> grids[] = {std::nullopt, 64, 128};
    const bool with_mlp = arch != Arch::Basic && arch != Arch::Diag;
    const int layers[] = {1, 2, 4};
    const int widths[] = {16, 32, 64};

    std::vector<CvCandidate> out;
    for (int e : epochs)
        for (int b : batches)
            for (double lr : rates)
                for (const auto& m : grids) {
                    CvCandidate base;
                    base.config.epochs = e;
                    base.config.batch_size = b;
                    base.config.learning_rate = lr;
                    base.config.grid_points = m;
                    if (!with_mlp) {
                        out.push_back(base);
                        continue;
                    }
                    for (int l : layers)
                        for (int w : widths) {
                            CvCandidate c = base;
                            c.mlp = MLPSpec{l, w};
                            out.push_back(c);
                        }
                }
    return out;
}

EmbeddingNet make_net(Arch arch, int input_dim, const MLPSpec& spec, double lambda,
                      std::uint64_t seed) {
    switch (arch) {
        case Arch::Basic: return EmbeddingNet::basic(input_dim);
        case Arch::Diag: return EmbeddingNet::diag(input_dim);
        case Arch::Mlp: return EmbeddingNet::mlp(input_dim, spec, seed);
        case Arch::ResBasic: return EmbeddingNet::residual(input_dim, spec, false, lambda, seed);
        case Arch::ResDiag: return EmbeddingNet::residual(input_dim, spec, true, lambda, seed);
    }
    throw std::logic_error("make_net: unknown architecture");
}

namespace {

// Clamp into the grid range, then snap. Validation folds can hold times
// outside the training fold's range.
SurvivalDataset clamp_and_snap(const SurvivalDataset& data, const TimeGrid& grid) {
    Eigen::VectorXd t = data.times();
    for (Eigen::Index i = 0; i < t.size(); ++i)
        t[i] = std::clamp(t[i], grid.times.front(), grid.times.back());
    SurvivalDataset clamped(data.features(), std::move(t), data.events(),
                            data.feature_names(), data.standardization());
    return snap_to_grid(clamped, grid);
}

struct FoldScore {
    double ctd = std::numeric_limits<double>::quiet_NaN();
    double loss = std::numeric_limits<double>::quiet_NaN();
};

FoldScore evaluate_fold(Arch arch, double lambda, const CvCandidate& candidate,
                        const SurvivalDataset& fit_part, const SurvivalDataset& val_part,
                        std::uint64_t seed) {
    CvCandidate c = candidate;
    c.config.seed = seed;
    EmbeddingNet net = make_net(arch, static_cast<int>(fit_part.feature_dim()), c.mlp,
                                lambda, seed);
    TrainResult run = train(std::move(net), fit_part, c.config);

    const SurvivalDataset fit_snapped =
        run.grid.quantized ? snap_to_grid(fit_part, run.grid) : fit_part;
    auto kernel = std::make_shared<GaussianEmbeddingKernel>(run.net);
    FittedConditionalKM fitted(fit_snapped, kernel, run.grid);

    FoldScore score;
    std::vector<SurvivalCurve> curves;
    curves.reserve(val_part.size());
    for (std::size_t i = 0; i < val_part.size(); ++i)
        curves.push_back(fitted.predict(val_part.feature_row(i)));
    try {
        score.ctd = ctd_index(curves, val_part).ctd;
    } catch (const std::invalid_argument&) {
        // no comparable validation pairs; leave NaN so the fold is ignored
    }
    if (val_part.size() >= 2)
        score.loss = survival_loss(run.net, clamp_and_snap(val_part, run.grid), run.grid).value;
    return score;
}

}  // namespace

CvResult cross_validate(Arch arch, const SurvivalDataset& train_data,
                        const CvOptions& options) {
    if (options.folds < 2) throw std::invalid_argument("cross_validate: need >= 2 folds");
    const std::size_t n = train_data.size();
    if (n < static_cast<std::size_t>(2 * options.folds))
        throw std::invalid_argument("cross_validate: too few subjects for the fold count");

    // seeded fold assignment by index chunks of a shuffled order
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(options.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::pair<std::size_t, std::size_t>> fold_ranges;  // [begin, end) in order
    for (int f = 0; f < options.folds; ++f) {
        const auto begin = static_cast<std::size_t>(
            std::llround(static_cast<double>(f) / options.folds * static_cast<double>(n)));
        const auto end = static_cast<std::size_t>(std::llround(
            static_cast<double>(f + 1) / options.folds * static_cast<double>(n)));
        fold_ranges.emplace_back(begin, end);
    }

    CvResult result;
    result.candidates = search_grid(arch);
    const std::size_t tasks = result.candidates.size() *
                              static_cast<std::size_t>(options.folds);
    std::vector<FoldScore> scores(tasks);

    auto run_task = [&](std::size_t task) {
        const std::size_t ci = task / static_cast<std::size_t>(options.folds);
        const int fold = static_cast<int>(task % static_cast<std::size_t>(options.folds));
        const auto [vb, ve] = fold_ranges[static_cast<std::size_t>(fold)];
        std::vector<std::size_t> fit_rows, val_rows;
        for (std::size_t k = 0; k < n; ++k)
            (k >= vb && k < ve ? val_rows : fit_rows).push_back(order[k]);
        const auto fit_part = train_data.subset(fit_rows);
        const auto val_part = train_data.subset(val_rows);
        const std::uint64_t seed =
            options.seed * 1000003ULL + ci * 131ULL + static_cast<std::uint64_t>(fold);
        scores[task] = evaluate_fold(arch, options.lambda, result.candidates[ci], fit_part,
                                     val_part, seed);
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        for (std::size_t t = 0; t < tasks; ++t) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (int j = 0; j < jobs; ++j)
            workers.emplace_back([&] {
                while (true) {
                    const std::size_t t = next.fetch_add(1);
                    if (t >= tasks) break;
                    run_task(t);
                }
            });
        for (auto& w : workers) w.join();
    }

    result.mean_ctd.resize(result.candidates.size());
    result.mean_loss.resize(result.candidates.size());
    for (std::size_t ci = 0; ci < result.candidates.size(); ++ci) {
        double csum = 0.0, lsum = 0.0;
        int cn = 0, ln = 0;
        for (int f = 0; f < options.folds; ++f) {
            const auto& s = scores[ci * static_cast<std::size_t>(options.folds) +
                                   static_cast<std::size_t>(f)];
            if (!std::isnan(s.ctd)) {
                csum += s.ctd;
                ++cn;
            }
            if (!std::isnan(s.loss)) {
                lsum += s.loss;
                ++ln;
            }
        }
        result.mean_ctd[ci] = cn > 0 ? csum / cn : std::numeric_limits<double>::quiet_NaN();
        result.mean_loss[ci] = ln > 0 ? lsum / ln : std::numeric_limits<double>::quiet_NaN();
    }

    // best score wins; ties keep the earlier grid point
    std::size_t best = 0;
    bool found = false;
    for (std::size_t ci = 0; ci < result.candidates.size(); ++ci) {
        const double score = options.select == CvSelect::Ctd ? result.mean_ctd[ci]
                                                             : -result.mean_loss[ci];
        if (std::isnan(score)) continue;
        const double best_score = options.select == CvSelect::Ctd ? result.mean_ctd[best]
                                                                  : -result.mean_loss[best];
        if (!found || score > best_score) {
            best = ci;
            found = true;
        }
    }
    if (!found) throw std::runtime_error("cross_validate: every fold score was undefined");
    result.best_index = best;
    return result;
}

}  // namespace ksa
