#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "priorgan/numerics.hpp"

namespace priorgan {

enum class Activation { Identity, Relu, Tanh, Sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Fully connected layer. Weights are stored input-major (in × out) so the
/// forward pass is a sequence of contiguous axpy updates.
struct DenseLayer {
    Mat weight;  // in × out
    Vec bias;    // out

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

class Mlp {
public:
    Mlp() = default;
    /// Zero-initialised network; `dims` lists input, hidden widths and output.
    Mlp(std::vector<std::size_t> dims, Activation hidden, Activation output);
    /// Uniform(−1/√fan_in, 1/√fan_in) initialisation for weights and biases.
    static Mlp random(std::vector<std::size_t> dims, Activation hidden, Activation output, Rng& rng);

    std::size_t input_dim() const noexcept { return dims_.front(); }
    std::size_t output_dim() const noexcept { return dims_.back(); }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    std::size_t parameter_count() const noexcept;
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }

    Activation hidden_activation() const noexcept { return hidden_; }
    Activation output_activation() const noexcept { return output_; }
    Activation activation_of(std::size_t layer) const noexcept {
        return layer + 1 == layers_.size() ? output_ : hidden_;
    }

    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

    friend bool operator==(const Mlp&, const Mlp&) = default;

private:
    std::vector<std::size_t> dims_;
    Activation hidden_ = Activation::Relu;
    Activation output_ = Activation::Identity;
    std::vector<DenseLayer> layers_;
};

/// Activation record of one batched forward pass.
struct Tape {
    std::vector<Mat> inputs;  // per layer: batch × in
    std::vector<Mat> pre;     // per layer: batch × out (pre-activation)
    Mat output;               // batch × out of the final layer (post-activation)

    std::size_t batch() const noexcept { return output.rows(); }
};

/// Gradients with the same shapes as the network parameters.
struct MlpGrads {
    std::vector<Mat> weight;
    std::vector<Vec> bias;

    static MlpGrads zeros_like(const Mlp& net);
    void set_zero();
    friend bool operator==(const MlpGrads&, const MlpGrads&) = default;
};

/// Batched forward pass; rows of `x` are samples.
Mat forward(const Mlp& net, const Mat& x, Tape& tape);
Mat forward(const Mlp& net, const Mat& x);
/// Single-sample forward pass.
Vec forward(const Mlp& net, std::span<const double> x, Tape& tape);

/// Reverse pass for the scalar Σ_rows output·grad_output. Parameter gradients
/// are accumulated into `grads` when non-null; returns ∂/∂input.
Mat backward(const Mlp& net, const Tape& tape, const Mat& grad_output, MlpGrads* grads);
/// Same, seeded with the gradient with respect to the final pre-activation.
Mat backward_from_preactivation(const Mlp& net, const Tape& tape, Mat grad_pre, MlpGrads* grads);
Vec backward(const Mlp& net, const Tape& tape, std::span<const double> grad_output, MlpGrads* grads);

/// Flat views over all parameters (weights then bias, layer by layer).
std::vector<double> flatten_parameters(const Mlp& net);
void assign_parameters(Mlp& net, std::span<const double> flat);
std::vector<double> flatten_grads(const MlpGrads& grads);

Mat rows_to_mat(std::span<const Vec> rows);
std::vector<Vec> mat_to_rows(const Mat& m);

}  // namespace priorgan
