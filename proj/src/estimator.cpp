#include "ksa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ksa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double SurvivalCurve::value_at(double t) const {
    const auto it = std::upper_bound(grid.times.begin(), grid.times.end(), t);
    if (it == grid.times.begin()) return 1.0;
    return values[static_cast<std::size_t>(it - grid.times.begin()) - 1];
}

SurvivalCurve kaplan_meier(const SurvivalDataset& dataset) {
    if (dataset.empty()) throw std::invalid_argument("kaplan_meier: empty dataset");
    SurvivalCurve curve;
    curve.grid = build_time_grid(dataset);
    const auto m = curve.grid.size();
    std::vector<double> deaths(m, 0.0), count_at(m, 0.0);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        // grid is built from this dataset, so every time is on it
        const auto g = curve.grid.exact_index(dataset.time(i));
        deaths[*g] += dataset.event(i);
        count_at[*g] += 1.0;
    }
    std::vector<double> at_risk(m, 0.0);
    double suffix = 0.0;
    for (std::size_t l = m; l-- > 0;) {
        suffix += count_at[l];
        at_risk[l] = suffix;
    }
    curve.values.resize(m);
    double surv = 1.0;
    for (std::size_t l = 0; l < m; ++l) {
        surv *= 1.0 - deaths[l] / at_risk[l];
        curve.values[l] = surv;
    }
    return curve;
}

FittedConditionalKM::FittedConditionalKM(SurvivalDataset train,
                                         std::shared_ptr<const Kernel> kernel, TimeGrid grid,
                                         double epsilon)
    : train_(std::move(train)),
      kernel_(std::move(kernel)),
      grid_(std::move(grid)),
      epsilon_(epsilon) {
    if (train_.empty()) throw std::invalid_argument("FittedConditionalKM: empty training set");
    if (!kernel_) throw std::invalid_argument("FittedConditionalKM: null kernel");
    if (!(epsilon_ > 0.0))
        throw std::invalid_argument("FittedConditionalKM: epsilon must be positive");
    prepared_ = kernel_->prepare(train_.features());
    order_.resize(train_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(),
              [&](std::size_t a, std::size_t b) { return train_.time(a) < train_.time(b); });
}

std::vector<double> FittedConditionalKM::hazard_from_weights(Eigen::VectorXd w) const {
    const auto m = grid_.size();
    // weighted deaths at each grid time and weighted at-risk counts, walking
    // subjects in time order so n_K comes out as a suffix sum
    std::vector<double> death_w(m, 0.0), risk_w(m, 0.0);
    std::vector<double> haz(m, 0.0);

    // n_K(t_l) = sum of weights with Y_j >= t_l
    double suffix = 0.0;
    std::size_t pos = train_.size();  // walks order_ from the largest time down
    for (std::size_t li = m; li-- > 0;) {
        const double t = grid_.times[li];
        while (pos > 0 && train_.time(order_[pos - 1]) >= t) {
            suffix += w[static_cast<Eigen::Index>(order_[pos - 1])];
            --pos;
        }
        risk_w[li] = suffix;
    }
    for (std::size_t i = 0; i < train_.size(); ++i) {
        if (!train_.event(i)) continue;
        const auto g = grid_.exact_index(train_.time(i));
        if (g) death_w[*g] += w[static_cast<Eigen::Index>(i)];
    }
    for (std::size_t l = 0; l < m; ++l) haz[l] = death_w[l] / (risk_w[l] + epsilon_);
    return haz;
}

std::vector<double> FittedConditionalKM::hazard(const Eigen::VectorXd& x,
                                                std::optional<std::size_t> exclude) const {
    if (x.size() != train_.feature_dim())
        throw std::invalid_argument("FittedConditionalKM: feature dimension mismatch");
    Eigen::VectorXd w = prepared_->weights(x);
    if (exclude) {
        if (*exclude >= train_.size())
            throw std::invalid_argument("FittedConditionalKM: invalid excluded index");
        w[static_cast<Eigen::Index>(*exclude)] = 0.0;
    }
    return hazard_from_weights(std::move(w));
}

SurvivalCurve FittedConditionalKM::predict(const Eigen::VectorXd& x) const {
    const auto haz = hazard(x);
    SurvivalCurve curve;
    curve.grid = grid_;
    curve.values.resize(haz.size());
    double surv = 1.0;
    for (std::size_t l = 0; l < haz.size(); ++l) {
        surv *= 1.0 - haz[l];
        curve.values[l] = surv;
    }
    return curve;
}

double median_survival_time(const SurvivalCurve& curve) {
    const auto& t = curve.grid.times;
    const auto& v = curve.values;
    const auto m = v.size();
    if (m == 0) return kInf;

    // first grid time with S <= 1/2 (the curve is right-continuous, so the
    // infimum is attained at a grid point)
    double first_below = kInf;
    for (std::size_t l = 0; l < m; ++l) {
        if (v[l] <= 0.5) {
            first_below = t[l];
            break;
        }
    }
    if (first_below == kInf) return kInf;

    // sup of {t : S(t) >= 1/2}: the curve holds its value up to the next
    // grid time, and S = 1 before the first one
    std::size_t l = m;
    while (l > 0 && v[l - 1] < 0.5) --l;
    if (l == m) return kInf;  // final value still >= 1/2, so the sup is infinite
    // curve is >= 1/2 on [..., t[l]) and strictly below from t[l] on
    const double last_above = t[l];

    return 0.5 * (first_below + last_above);
}

double mean_survival_time(const SurvivalCurve& curve, double horizon) {
    const auto& t = curve.grid.times;
    const auto& v = curve.values;
    if (t.empty()) throw std::invalid_argument("mean_survival_time: empty curve");
    if (horizon < t.back())
        throw std::invalid_argument("mean_survival_time: horizon below last grid time");
    double area = std::min(t.front(), horizon) * 1.0;  // S = 1 before the first grid time
    for (std::size_t l = 0; l + 1 < t.size(); ++l) area += v[l] * (t[l + 1] - t[l]);
    area += v.back() * (horizon - t.back());
    return area;
}

SurvivalTimeEstimator make_time_estimator(std::shared_ptr<const FittedConditionalKM> fit,
                                          TimeEstimate type, std::optional<double> horizon) {
    if (!fit) throw std::invalid_argument("make_time_estimator: null fit");
    const double last = fit->grid().times.back();
    const double h = horizon.value_or(last);
    if (type == TimeEstimate::Mean && h < last)
        throw std::invalid_argument("make_time_estimator: horizon below last grid time");
    return [fit, type, h, last](const Eigen::VectorXd& x) {
        const SurvivalCurve curve = fit->predict(x);
        if (type == TimeEstimate::Mean) return mean_survival_time(curve, h);
        const double med = median_survival_time(curve);
        return std::isfinite(med) ? med : last;
    };
}

}  // namespace ksa
