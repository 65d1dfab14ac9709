#include "priorgan/mlp.hpp"

#include <algorithm>
#include <cmath>

namespace priorgan {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    fail(ErrorCode::InvalidArgument, "unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<std::size_t> dims, Activation hidden, Activation output)
    : dims_(std::move(dims)), hidden_(hidden), output_(output) {
    require(dims_.size() >= 2, ErrorCode::InvalidArgument, "network needs input and output dims");
    for (auto d : dims_) require(d >= 1, ErrorCode::InvalidArgument, "layer widths must be >= 1");
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l)
        layers_.push_back(DenseLayer{Mat(dims_[l], dims_[l + 1]), Vec(dims_[l + 1], 0.0)});
}

Mlp Mlp::random(std::vector<std::size_t> dims, Activation hidden, Activation output, Rng& rng) {
    Mlp net(std::move(dims), hidden, output);
    for (auto& layer : net.layers_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.rows()));
        for (double& w : layer.weight.data()) w = bound * (2.0 * rng.uniform() - 1.0);
        for (double& b : layer.bias) b = bound * (2.0 * rng.uniform() - 1.0);
    }
    return net;
}

std::size_t Mlp::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
    MlpGrads g;
    for (const auto& l : net.layers()) {
        g.weight.emplace_back(l.weight.rows(), l.weight.cols());
        g.bias.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

void MlpGrads::set_zero() {
    for (auto& w : weight) std::fill(w.data().begin(), w.data().end(), 0.0);
    for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

namespace {

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void activate(Activation a, std::span<const double> pre, std::span<double> out) {
    switch (a) {
    case Activation::Identity:
        for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i];
        break;
    case Activation::Relu:
        for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? pre[i] : 0.0;
        break;
    case Activation::Tanh:
        for (std::size_t i = 0; i < pre.size(); ++i) out[i] = std::tanh(pre[i]);
        break;
    case Activation::Sigmoid:
        for (std::size_t i = 0; i < pre.size(); ++i) out[i] = sigmoid(pre[i]);
        break;
    }
}

// grad *= activation'(pre), using the post-activation `post` where cheaper.
void activation_backward(Activation a, std::span<const double> pre, std::span<const double> post,
                         std::span<double> grad) {
    switch (a) {
    case Activation::Identity: break;
    case Activation::Relu:
        for (std::size_t i = 0; i < grad.size(); ++i)
            if (!(pre[i] > 0.0)) grad[i] = 0.0;
        break;
    case Activation::Tanh:
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - post[i] * post[i];
        break;
    case Activation::Sigmoid:
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= post[i] * (1.0 - post[i]);
        break;
    }
}

constexpr std::size_t kBlock = 8;

// z = bias + x·W for one sample, W stored in × out. Accumulators are held in
// a fixed-size block so they stay in registers across the input loop; the
// per-output summation order (bias, then inputs in order) is unchanged.
void affine_row(const double* x, const double* w, const double* bias, double* z, std::size_t in, std::size_t out) {
    std::size_t o0 = 0;
    for (; o0 + kBlock <= out; o0 += kBlock) {
        double acc[kBlock];
        for (std::size_t k = 0; k < kBlock; ++k) acc[k] = bias[o0 + k];
        for (std::size_t i = 0; i < in; ++i) {
            const double xv = x[i];
            const double* wr = w + i * out + o0;
            for (std::size_t k = 0; k < kBlock; ++k) acc[k] += xv * wr[k];
        }
        for (std::size_t k = 0; k < kBlock; ++k) z[o0 + k] = acc[k];
    }
    for (std::size_t o = o0; o < out; ++o) {
        double acc = bias[o];
        for (std::size_t i = 0; i < in; ++i) acc += x[i] * w[i * out + o];
        z[o] = acc;
    }
}

// g[o] += Σ_b x[b·stride] · d[b·out + o], summing over b in order.
void accumulate_outer_column(const double* x, std::size_t stride, const double* d, std::size_t out, std::size_t batch,
                             double* g) {
    std::size_t o0 = 0;
    for (; o0 + kBlock <= out; o0 += kBlock) {
        double acc[kBlock];
        for (std::size_t k = 0; k < kBlock; ++k) acc[k] = g[o0 + k];
        for (std::size_t b = 0; b < batch; ++b) {
            const double xv = x[b * stride];
            const double* dr = d + b * out + o0;
            for (std::size_t k = 0; k < kBlock; ++k) acc[k] += xv * dr[k];
        }
        for (std::size_t k = 0; k < kBlock; ++k) g[o0 + k] = acc[k];
    }
    for (std::size_t o = o0; o < out; ++o) {
        double acc = g[o];
        for (std::size_t b = 0; b < batch; ++b) acc += x[b * stride] * d[b * out + o];
        g[o] = acc;
    }
}

void check_tape(const Mlp& net, const Tape& tape) {
    if (tape.inputs.size() != net.layer_count() || tape.pre.size() != net.layer_count())
        fail(ErrorCode::TapeMismatch, "tape layer count does not match network");
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto& w = net.layers()[l].weight;
        if (tape.inputs[l].cols() != w.rows() || tape.pre[l].cols() != w.cols() ||
            tape.inputs[l].rows() != tape.batch() || tape.pre[l].rows() != tape.batch())
            fail(ErrorCode::TapeMismatch, "tape shapes do not match layer " + std::to_string(l));
    }
}

}  // namespace

Mat forward(const Mlp& net, const Mat& x, Tape& tape) {
    require(net.layer_count() > 0, ErrorCode::InvalidArgument, "forward through an empty network");
    if (x.cols() != net.input_dim())
        fail(ErrorCode::DimensionMismatch, "network expects " + std::to_string(net.input_dim()) + " inputs, got " +
                                               std::to_string(x.cols()));
    const std::size_t batch = x.rows();
    tape.inputs.resize(net.layer_count());
    tape.pre.resize(net.layer_count());
    tape.inputs[0] = x;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto& layer = net.layers()[l];
        const std::size_t in = layer.weight.rows();
        const std::size_t out = layer.weight.cols();
        Mat& pre = tape.pre[l];
        pre = Mat(batch, out);
        const Mat& input = tape.inputs[l];
        for (std::size_t b = 0; b < batch; ++b)
            affine_row(input.row(b).data(), layer.weight.data().data(), layer.bias.data(), pre.row(b).data(), in, out);
        Mat post(batch, out);
        activate(net.activation_of(l), pre.data(), post.data());
        if (l + 1 < net.layer_count())
            tape.inputs[l + 1] = std::move(post);
        else
            tape.output = std::move(post);
    }
    return tape.output;
}

Mat forward(const Mlp& net, const Mat& x) {
    Tape tape;
    return forward(net, x, tape);
}

Vec forward(const Mlp& net, std::span<const double> x, Tape& tape) {
    Mat in(1, x.size(), Vec(x.begin(), x.end()));
    return forward(net, in, tape).data();
}

Mat backward_from_preactivation(const Mlp& net, const Tape& tape, Mat grad_pre, MlpGrads* grads) {
    check_tape(net, tape);
    if (grad_pre.rows() != tape.batch() || grad_pre.cols() != net.output_dim())
        fail(ErrorCode::TapeMismatch, "output gradient shape does not match tape");
    if (grads && (grads->weight.size() != net.layer_count() || grads->bias.size() != net.layer_count()))
        fail(ErrorCode::TapeMismatch, "gradient buffers do not match network");

    const std::size_t batch = tape.batch();
    Mat delta = std::move(grad_pre);
    for (std::size_t l = net.layer_count(); l-- > 0;) {
        const auto& layer = net.layers()[l];
        const std::size_t in = layer.weight.rows();
        const std::size_t out = layer.weight.cols();
        const Mat& input = tape.inputs[l];

        if (grads) {
            Mat& gw = grads->weight[l];
            Vec& gb = grads->bias[l];
            for (std::size_t b = 0; b < batch; ++b) {
                const double* d = delta.row(b).data();
                for (std::size_t o = 0; o < out; ++o) gb[o] += d[o];
            }
            for (std::size_t i = 0; i < in; ++i)
                accumulate_outer_column(input.data().data() + i, in, delta.data().data(), out, batch,
                                        gw.row(i).data());
        }

        Mat grad_in(batch, in);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* d = delta.row(b).data();
            double* gi = grad_in.row(b).data();
            for (std::size_t i = 0; i < in; ++i) {
                const double* w = layer.weight.row(i).data();
                double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
                std::size_t o = 0;
                for (; o + 4 <= out; o += 4) {
                    s0 += w[o] * d[o];
                    s1 += w[o + 1] * d[o + 1];
                    s2 += w[o + 2] * d[o + 2];
                    s3 += w[o + 3] * d[o + 3];
                }
                for (; o < out; ++o) s0 += w[o] * d[o];
                gi[i] = (s0 + s1) + (s2 + s3);
            }
        }
        if (l > 0) {
            // tape.inputs[l] is the post-activation of layer l−1.
            activation_backward(net.activation_of(l - 1), tape.pre[l - 1].data(), tape.inputs[l].data(),
                                grad_in.data());
        }
        delta = std::move(grad_in);
    }
    return delta;
}

Mat backward(const Mlp& net, const Tape& tape, const Mat& grad_output, MlpGrads* grads) {
    check_tape(net, tape);
    if (grad_output.rows() != tape.batch() || grad_output.cols() != net.output_dim())
        fail(ErrorCode::TapeMismatch, "output gradient shape does not match tape");
    Mat grad_pre = grad_output;
    activation_backward(net.output_activation(), tape.pre.back().data(), tape.output.data(), grad_pre.data());
    return backward_from_preactivation(net, tape, std::move(grad_pre), grads);
}

Vec backward(const Mlp& net, const Tape& tape, std::span<const double> grad_output, MlpGrads* grads) {
    Mat g(1, grad_output.size(), Vec(grad_output.begin(), grad_output.end()));
    return backward(net, tape, g, grads).data();
}

std::vector<double> flatten_parameters(const Mlp& net) {
    std::vector<double> flat;
    flat.reserve(net.parameter_count());
    for (const auto& l : net.layers()) {
        flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void assign_parameters(Mlp& net, std::span<const double> flat) {
    require(flat.size() == net.parameter_count(), ErrorCode::DimensionMismatch, "parameter vector length mismatch");
    std::size_t k = 0;
    for (auto& l : net.layers()) {
        for (double& w : l.weight.data()) w = flat[k++];
        for (double& b : l.bias) b = flat[k++];
    }
}

std::vector<double> flatten_grads(const MlpGrads& grads) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < grads.weight.size(); ++l) {
        flat.insert(flat.end(), grads.weight[l].data().begin(), grads.weight[l].data().end());
        flat.insert(flat.end(), grads.bias[l].begin(), grads.bias[l].end());
    }
    return flat;
}

Mat rows_to_mat(std::span<const Vec> rows) {
    if (rows.empty()) return Mat();
    const std::size_t d = rows.front().size();
    Mat m(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == d, ErrorCode::DimensionMismatch, "rows differ in length");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

std::vector<Vec> mat_to_rows(const Mat& m) {
    std::vector<Vec> rows;
    rows.reserve(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) rows.emplace_back(m.row(r).begin(), m.row(r).end());
    return rows;
}

}  // namespace priorgan
