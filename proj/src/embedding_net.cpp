#include "ksa/embedding_net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ksa {
namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

using RowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Flat-parameter layout of the MLP chunk: per hidden layer
// [W (w x in), b (w), gamma (w), beta (w)], then [W_out (d x w), b_out (d)].
struct MlpLayout {
    int in_dim = 0, out_dim = 0;
    MLPSpec spec;

    int layer_in(int k) const { return k == 0 ? in_dim : spec.hidden_width; }
    Eigen::Index layer_size(int k) const {
        return static_cast<Eigen::Index>(spec.hidden_width) * (layer_in(k) + 3);
    }
    Eigen::Index layer_offset(int k) const {
        Eigen::Index off = 0;
        for (int j = 0; j < k; ++j) off += layer_size(j);
        return off;
    }
    Eigen::Index final_offset() const { return layer_offset(spec.hidden_layers); }
    Eigen::Index total() const {
        return final_offset() +
               static_cast<Eigen::Index>(out_dim) * spec.hidden_width + out_dim;
    }
};

bool has_mlp(Arch a) { return a != Arch::Basic && a != Arch::Diag; }

Eigen::Index outer_size(Arch a, int d) {
    switch (a) {
        case Arch::Basic:
        case Arch::ResBasic: return 1;
        case Arch::Diag:
        case Arch::ResDiag: return d;
        case Arch::Mlp: return 0;
    }
    return 0;
}

}  // namespace

struct NetAccess {
    static MlpLayout layout(const EmbeddingNet& net) {
        MlpLayout l;
        l.in_dim = net.input_dim_;
        l.out_dim = net.input_dim_;
        l.spec = net.spec_;
        return l;
    }
    static Eigen::Index mlp_offset(const EmbeddingNet& net) {
        return outer_size(net.arch_, net.input_dim_);
    }
};

namespace {

void init_mlp_params(Eigen::Ref<Eigen::VectorXd> chunk, const MlpLayout& layout,
                     std::uint64_t seed, bool zero_final_layer) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    chunk.setZero();
    for (int k = 0; k < layout.spec.hidden_layers; ++k) {
        const int in = layout.layer_in(k);
        const int w = layout.spec.hidden_width;
        const double std_dev = std::sqrt(2.0 / static_cast<double>(in));
        Eigen::Index off = layout.layer_offset(k);
        for (int i = 0; i < w * in; ++i) chunk[off + i] = std_dev * normal(rng);
        // biases stay 0; gamma = 1, beta = 0
        chunk.segment(off + static_cast<Eigen::Index>(w) * in + w, w).setOnes();
    }
    if (!zero_final_layer) {
        const int w = layout.spec.hidden_width;
        const double std_dev = std::sqrt(2.0 / static_cast<double>(w));
        Eigen::Index off = layout.final_offset();
        for (int i = 0; i < layout.out_dim * w; ++i) chunk[off + i] = std_dev * normal(rng);
    }
}

// Forward one MLP chunk. In train mode BatchNorm uses batch statistics;
// otherwise the provided running stats.
Eigen::MatrixXd mlp_forward(const Eigen::MatrixXd& X, const MlpLayout& layout,
                            const Eigen::VectorXd& params, Eigen::Index off,
                            const std::vector<BatchNormStats>& stats, bool train_mode,
                            std::vector<MlpLayerCache>* caches,
                            Eigen::MatrixXd* final_input) {
    const auto B = X.rows();
    Eigen::MatrixXd h = X;
    for (int k = 0; k < layout.spec.hidden_layers; ++k) {
        const int in = layout.layer_in(k);
        const int w = layout.spec.hidden_width;
        const Eigen::Index o = off + layout.layer_offset(k);
        RowMajorMap W(params.data() + o, w, in);
        const auto b = params.segment(o + static_cast<Eigen::Index>(w) * in, w);
        const auto gamma = params.segment(o + static_cast<Eigen::Index>(w) * in + w, w);
        const auto beta = params.segment(o + static_cast<Eigen::Index>(w) * in + 2 * w, w);

        Eigen::MatrixXd a = h * W.transpose();
        a.rowwise() += b.transpose();
        Eigen::MatrixXd r = a.cwiseMax(0.0);

        Eigen::VectorXd mean, var;
        if (train_mode) {
            mean = r.colwise().mean();
            var = (r.rowwise() - mean.transpose()).array().square().colwise().sum() /
                  static_cast<double>(B);
        } else {
            mean = stats[static_cast<std::size_t>(k)].running_mean;
            var = stats[static_cast<std::size_t>(k)].running_var;
        }
        Eigen::VectorXd inv_std = (var.array() + kBnEps).rsqrt();
        Eigen::MatrixXd xhat =
            (r.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array();
        Eigen::MatrixXd out =
            (xhat.array().rowwise() * gamma.transpose().array()).matrix();
        out.rowwise() += beta.transpose();

        if (caches) {
            MlpLayerCache c;
            c.input = std::move(h);
            c.preact = std::move(a);
            c.relu_out = std::move(r);
            c.xhat = std::move(xhat);
            c.batch_mean = std::move(mean);
            c.batch_var = std::move(var);
            c.inv_std = std::move(inv_std);
            caches->push_back(std::move(c));
        }
        h = std::move(out);
    }
    if (final_input) *final_input = h;
    const int w_last = layout.spec.hidden_layers > 0 ? layout.spec.hidden_width : layout.in_dim;
    const Eigen::Index fo = off + layout.final_offset();
    RowMajorMap Wout(params.data() + fo, layout.out_dim, w_last);
    const auto bout = params.segment(fo + static_cast<Eigen::Index>(layout.out_dim) * w_last,
                                     layout.out_dim);
    Eigen::MatrixXd z = h * Wout.transpose();
    z.rowwise() += bout.transpose();
    return z;
}

// Backward through the MLP chunk (training-mode statistics). Returns the
// gradient with respect to the chunk input.
Eigen::MatrixXd mlp_backward(const MlpLayout& layout, const Eigen::VectorXd& params,
                             Eigen::Index off, const std::vector<MlpLayerCache>& caches,
                             const Eigen::MatrixXd& final_input, const Eigen::MatrixXd& dZ,
                             Eigen::Ref<Eigen::VectorXd> grad) {
    const int w_last = layout.spec.hidden_layers > 0 ? layout.spec.hidden_width : layout.in_dim;
    const Eigen::Index fo = off + layout.final_offset();
    RowMajorMap Wout(params.data() + fo, layout.out_dim, w_last);

    RowMajorMutMap dWout(grad.data() + fo, layout.out_dim, w_last);
    dWout = dZ.transpose() * final_input;
    grad.segment(fo + static_cast<Eigen::Index>(layout.out_dim) * w_last, layout.out_dim) =
        dZ.colwise().sum();

    Eigen::MatrixXd dh = dZ * Wout;
    for (int k = layout.spec.hidden_layers - 1; k >= 0; --k) {
        const auto& c = caches[static_cast<std::size_t>(k)];
        const int in = layout.layer_in(k);
        const int w = layout.spec.hidden_width;
        const auto B = static_cast<double>(c.input.rows());
        const Eigen::Index o = off + layout.layer_offset(k);
        RowMajorMap W(params.data() + o, w, in);
        const auto gamma = params.segment(o + static_cast<Eigen::Index>(w) * in + w, w);

        // BatchNorm backward
        grad.segment(o + static_cast<Eigen::Index>(w) * in + w, w) =
            (dh.array() * c.xhat.array()).colwise().sum();          // dgamma
        grad.segment(o + static_cast<Eigen::Index>(w) * in + 2 * w, w) =
            dh.colwise().sum();                                     // dbeta
        Eigen::MatrixXd dxhat =
            (dh.array().rowwise() * gamma.transpose().array()).matrix();
        Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
        Eigen::RowVectorXd sum_dxhat_xhat =
            (dxhat.array() * c.xhat.array()).colwise().sum();
        // dr = invstd/B * (B*dxhat - sum(dxhat) - xhat .* sum(dxhat .* xhat))
        Eigen::MatrixXd dr = ((dxhat * B).rowwise() - sum_dxhat).array() -
                             (c.xhat.array().rowwise() * sum_dxhat_xhat.array());
        dr = dr.array().rowwise() * (c.inv_std.transpose().array() / B);

        // ReLU backward
        Eigen::MatrixXd da =
            (c.preact.array() > 0.0).select(dr, Eigen::MatrixXd::Zero(dr.rows(), dr.cols()));

        RowMajorMutMap dW(grad.data() + o, w, in);
        dW = da.transpose() * c.input;
        grad.segment(o + static_cast<Eigen::Index>(w) * in, w) = da.colwise().sum();  // db
        dh = da * W;
    }
    return dh;
}

}  // namespace

EmbeddingNet EmbeddingNet::basic(int input_dim) {
    EmbeddingNet net;
    net.arch_ = Arch::Basic;
    net.input_dim_ = input_dim;
    net.params_ = Eigen::VectorXd::Ones(1);
    return net;
}

EmbeddingNet EmbeddingNet::diag(int input_dim) {
    EmbeddingNet net;
    net.arch_ = Arch::Diag;
    net.input_dim_ = input_dim;
    net.params_ = Eigen::VectorXd::Ones(input_dim);
    return net;
}

EmbeddingNet EmbeddingNet::mlp(int input_dim, const MLPSpec& spec, std::uint64_t seed) {
    if (spec.hidden_layers < 1 || spec.hidden_width < 1)
        throw std::invalid_argument("EmbeddingNet::mlp: invalid spec");
    EmbeddingNet net;
    net.arch_ = Arch::Mlp;
    net.input_dim_ = input_dim;
    net.spec_ = spec;
    MlpLayout layout{input_dim, input_dim, spec};
    net.params_.resize(layout.total());
    init_mlp_params(net.params_, layout, seed, /*zero_final_layer=*/false);
    net.bn_stats_.resize(static_cast<std::size_t>(spec.hidden_layers));
    for (auto& s : net.bn_stats_) {
        s.running_mean = Eigen::VectorXd::Zero(spec.hidden_width);
        s.running_var = Eigen::VectorXd::Ones(spec.hidden_width);
    }
    return net;
}

EmbeddingNet EmbeddingNet::residual(int input_dim, const MLPSpec& spec, bool diag_outer,
                                    double lambda, std::uint64_t seed) {
    if (spec.hidden_layers < 1 || spec.hidden_width < 1)
        throw std::invalid_argument("EmbeddingNet::residual: invalid spec");
    if (lambda <= 0.0) throw std::invalid_argument("EmbeddingNet::residual: lambda must be > 0");
    EmbeddingNet net;
    net.arch_ = diag_outer ? Arch::ResDiag : Arch::ResBasic;
    net.input_dim_ = input_dim;
    net.spec_ = spec;
    net.lambda_ = lambda;
    MlpLayout layout{input_dim, input_dim, spec};
    const Eigen::Index outer = outer_size(net.arch_, input_dim);
    net.params_.resize(outer + layout.total());
    net.params_.head(outer).setOnes();
    auto chunk = net.params_.segment(outer, layout.total());
    init_mlp_params(chunk, layout, seed, /*zero_final_layer=*/true);
    net.bn_stats_.resize(static_cast<std::size_t>(spec.hidden_layers));
    for (auto& s : net.bn_stats_) {
        s.running_mean = Eigen::VectorXd::Zero(spec.hidden_width);
        s.running_var = Eigen::VectorXd::Ones(spec.hidden_width);
    }
    return net;
}

EmbeddingNet EmbeddingNet::restore(Arch arch, int input_dim, const MLPSpec& spec, double lambda,
                                   Eigen::VectorXd parameters,
                                   std::vector<BatchNormStats> bn_stats) {
    EmbeddingNet net;
    net.arch_ = arch;
    net.input_dim_ = input_dim;
    net.spec_ = spec;
    net.lambda_ = lambda;
    net.params_ = std::move(parameters);
    net.bn_stats_ = std::move(bn_stats);
    Eigen::Index expected = outer_size(arch, input_dim);
    if (has_mlp(arch)) expected += MlpLayout{input_dim, input_dim, spec}.total();
    if (net.params_.size() != expected)
        throw std::invalid_argument("EmbeddingNet::restore: parameter count mismatch");
    if (has_mlp(arch) &&
        net.bn_stats_.size() != static_cast<std::size_t>(spec.hidden_layers))
        throw std::invalid_argument("EmbeddingNet::restore: BatchNorm stats mismatch");
    return net;
}

void EmbeddingNet::set_parameters(const Eigen::VectorXd& p) {
    if (p.size() != params_.size())
        throw std::invalid_argument("EmbeddingNet::set_parameters: size mismatch");
    params_ = p;
}

Eigen::VectorXd EmbeddingNet::forward(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim_)
        throw std::invalid_argument("EmbeddingNet::forward: dimension mismatch");
    Eigen::MatrixXd X = x.transpose();
    return forward_batch(X, /*train_mode=*/false).row(0);
}

Eigen::MatrixXd EmbeddingNet::forward_batch(const Eigen::MatrixXd& X, bool train_mode,
                                            ForwardCache* cache) const {
    if (X.cols() != input_dim_)
        throw std::invalid_argument("EmbeddingNet::forward_batch: dimension mismatch");
    if (cache) {
        cache->input = X;
        cache->layers.clear();
    }
    switch (arch_) {
        case Arch::Basic:
            return params_[0] * X;
        case Arch::Diag:
            return X.array().rowwise() * params_.transpose().array();
        case Arch::Mlp: {
            MlpLayout layout{input_dim_, input_dim_, spec_};
            return mlp_forward(X, layout, params_, 0, bn_stats_, train_mode,
                               cache ? &cache->layers : nullptr,
                               cache ? &cache->mlp_final_input : nullptr);
        }
        case Arch::ResBasic:
        case Arch::ResDiag: {
            MlpLayout layout{input_dim_, input_dim_, spec_};
            const Eigen::Index outer = outer_size(arch_, input_dim_);
            Eigen::MatrixXd phi =
                mlp_forward(X, layout, params_, outer, bn_stats_, train_mode,
                            cache ? &cache->layers : nullptr,
                            cache ? &cache->mlp_final_input : nullptr);
            Eigen::MatrixXd u = X + lambda_ * phi;
            if (cache) {
                cache->mlp_out = phi;
                cache->residual_pre = u;
            }
            if (arch_ == Arch::ResBasic) return params_[0] * u;
            return u.array().rowwise() * params_.head(outer).transpose().array();
        }
    }
    throw std::logic_error("EmbeddingNet: unknown architecture");
}

Eigen::VectorXd EmbeddingNet::backward(const ForwardCache& cache,
                                       const Eigen::MatrixXd& d_output) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
    switch (arch_) {
        case Arch::Basic:
            grad[0] = (d_output.array() * cache.input.array()).sum();
            return grad;
        case Arch::Diag:
            grad = (d_output.array() * cache.input.array()).colwise().sum();
            return grad;
        case Arch::Mlp: {
            MlpLayout layout{input_dim_, input_dim_, spec_};
            mlp_backward(layout, params_, 0, cache.layers, cache.mlp_final_input, d_output,
                         grad);
            return grad;
        }
        case Arch::ResBasic:
        case Arch::ResDiag: {
            MlpLayout layout{input_dim_, input_dim_, spec_};
            const Eigen::Index outer = outer_size(arch_, input_dim_);
            Eigen::MatrixXd du;
            if (arch_ == Arch::ResBasic) {
                grad[0] = (d_output.array() * cache.residual_pre.array()).sum();
                du = params_[0] * d_output;
            } else {
                grad.head(outer) =
                    (d_output.array() * cache.residual_pre.array()).colwise().sum();
                du = d_output.array().rowwise() * params_.head(outer).transpose().array();
            }
            Eigen::MatrixXd dphi = lambda_ * du;
            mlp_backward(layout, params_, outer, cache.layers, cache.mlp_final_input, dphi,
                         grad);
            return grad;
        }
    }
    throw std::logic_error("EmbeddingNet: unknown architecture");
}

void EmbeddingNet::update_running_stats(const ForwardCache& cache) {
    if (bn_stats_.empty()) return;
    for (std::size_t k = 0; k < cache.layers.size(); ++k) {
        const auto& c = cache.layers[k];
        const auto B = static_cast<double>(c.relu_out.rows());
        const double unbias = B > 1.0 ? B / (B - 1.0) : 1.0;
        auto& s = bn_stats_[k];
        s.running_mean = (1.0 - kBnMomentum) * s.running_mean + kBnMomentum * c.batch_mean;
        s.running_var =
            (1.0 - kBnMomentum) * s.running_var + kBnMomentum * (unbias * c.batch_var);
    }
}

}  // namespace ksa
