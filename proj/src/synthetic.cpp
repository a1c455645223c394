#include "ksa/synthetic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ksa {
namespace {

// Deterministic draw order: all features, then survival uniforms, then
// censoring uniforms, so the bisection tuner never disturbs the stream.
struct Draws {
    Eigen::MatrixXd features;      // n x d
    std::vector<int> cluster;      // TwoCluster only
    std::vector<double> u_surv;
    std::vector<double> u_cens;
};

Draws sample_draws(const SyntheticSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Draws d;
    d.features.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.d));
    if (spec.hazard_model == HazardModel::TwoClusterWeibull) {
        d.cluster.resize(spec.n);
        const double half = spec.cluster_separation / 2.0;
        for (std::size_t i = 0; i < spec.n; ++i) {
            d.cluster[i] = unif(rng) < 0.5 ? 0 : 1;
            const double center = d.cluster[i] == 0 ? -half : half;
            for (std::size_t j = 0; j < spec.d; ++j) {
                const double base = (j == 0) ? center : 0.0;
                d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    base + spec.cluster_noise * normal(rng);
            }
        }
    } else {
        for (std::size_t i = 0; i < spec.n; ++i)
            for (std::size_t j = 0; j < spec.d; ++j)
                d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    normal(rng);
    }
    d.u_surv.resize(spec.n);
    for (auto& u : d.u_surv) u = unif(rng);
    d.u_cens.resize(spec.n);
    for (auto& u : d.u_cens) u = unif(rng);
    return d;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.d < 1)
        throw std::invalid_argument("generate_synthetic: n and d must be positive");
    if (spec.censoring_rate_target < 0.0 || spec.censoring_rate_target >= 1.0)
        throw std::invalid_argument("generate_synthetic: censoring target must be in [0,1)");

    Eigen::VectorXd beta = spec.beta;
    if (spec.hazard_model == HazardModel::ExponentialRate) {
        if (beta.size() == 0) {
            beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.d));
            beta[0] = 1.0;
        }
        if (beta.size() != static_cast<Eigen::Index>(spec.d))
            throw std::invalid_argument("generate_synthetic: beta dimension mismatch");
    }

    const Draws draws = sample_draws(spec);

    // Survival times via inverse CDF.
    std::vector<double> surv_time(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double u = std::max(draws.u_surv[i], 1e-300);
        if (spec.hazard_model == HazardModel::ExponentialRate) {
            const double rate = std::exp(beta.dot(draws.features.row(static_cast<Eigen::Index>(i))));
            surv_time[i] = -std::log(u) / rate;
        } else {
            const double scale = draws.cluster[i] == 0 ? spec.weibull_scale0 : spec.weibull_scale1;
            surv_time[i] = scale * std::pow(-std::log(u), 1.0 / spec.weibull_shape);
        }
    }

    // Censoring times C_i = -log(U_i) / c share one exponential rate c, tuned
    // so the realized censored fraction (fraction with C_i < T_i) lands within
    // 0.05 of the target. The fraction is monotone increasing in c.
    double rate = 0.0;
    std::vector<double> observed(surv_time);
    std::vector<std::uint8_t> events(spec.n, 1);
    if (spec.censoring_rate_target > 0.0) {
        auto realized = [&](double c) {
            std::size_t censored = 0;
            for (std::size_t i = 0; i < spec.n; ++i) {
                const double ci = -std::log(std::max(draws.u_cens[i], 1e-300)) / c;
                censored += (surv_time[i] > ci);
            }
            return static_cast<double>(censored) / static_cast<double>(spec.n);
        };
        double lo = 1e-12, hi = 1.0;
        int steps = 0;
        while (realized(hi) < spec.censoring_rate_target) {
            hi *= 2.0;
            if (++steps > 100)
                throw std::runtime_error("generate_synthetic: censoring tuner failed to bracket");
        }
        double frac = realized(hi);
        rate = hi;
        for (steps = 0; steps < 100; ++steps) {
            const double mid = 0.5 * (lo + hi);
            frac = realized(mid);
            rate = mid;
            if (std::abs(frac - spec.censoring_rate_target) <= 0.05) break;
            if (frac < spec.censoring_rate_target)
                lo = mid;
            else
                hi = mid;
        }
        if (std::abs(frac - spec.censoring_rate_target) > 0.05)
            throw std::runtime_error("generate_synthetic: censoring tuner did not converge");
        for (std::size_t i = 0; i < spec.n; ++i) {
            const double ci = -std::log(std::max(draws.u_cens[i], 1e-300)) / rate;
            if (surv_time[i] <= ci) {
                events[i] = 1;
                observed[i] = surv_time[i];
            } else {
                events[i] = 0;
                observed[i] = ci;
            }
        }
    }

    std::vector<std::string> names(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) names[j] = "x" + std::to_string(j + 1);
    Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(observed.data(),
                                                    static_cast<Eigen::Index>(spec.n));

    SyntheticData out;
    out.dataset = SurvivalDataset(draws.features, std::move(t), std::move(events), names);
    out.censoring_rate = rate;
    if (spec.hazard_model == HazardModel::ExponentialRate) {
        out.survival = [beta](double t_, const Eigen::VectorXd& x) {
            return std::exp(-t_ * std::exp(beta.dot(x)));
        };
    } else {
        const double shape = spec.weibull_shape;
        const double s0 = spec.weibull_scale0, s1 = spec.weibull_scale1;
        out.survival = [shape, s0, s1](double t_, const Eigen::VectorXd& x) {
            const double scale = x[0] < 0.0 ? s0 : s1;
            return std::exp(-std::pow(t_ / scale, shape));
        };
    }
    return out;
}

}  // namespace ksa
