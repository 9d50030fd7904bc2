#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reachavoid/matrix.hpp"
#include "reachavoid/rng.hpp"

namespace reachavoid {

enum class Activation : std::uint8_t { Relu = 0, Tanh = 1, Identity = 2 };

// Per-layer parameter gradients produced by backpropagation. Shapes mirror
// the owning network. `input` holds d(loss)/d(input) rows when requested.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    Matrix input;  // batch x input_size, filled only when requested
    bool has_input_grad = false;

    bool all_finite() const;
};

// Cached activations from a forward pass, consumed by backpropagation.
// acts[0] is the input batch, acts[l] the post-activation output of layer l.
struct ForwardTrace {
    std::vector<Matrix> acts;
    const Matrix& output() const { return acts.back(); }
};

// Fully connected network: hidden layers with ReLU, configurable output
// activation (tanh for bounded action heads, identity for value heads).
// Weights are uniform in +-1/sqrt(fan_in) at construction.
class DenseNet {
public:
    // sizes = {input, hidden..., output}; at least input and output.
    DenseNet(std::vector<std::size_t> sizes, Activation output_activation,
             Rng& rng);

    static DenseNet zeros(std::vector<std::size_t> sizes,
                          Activation output_activation);

    // --- single-sample path (stateful cache, mirrors the training of one
    //     observation at a time during action selection) ---

    // Runs the net and caches activations for a subsequent backward().
    std::vector<double> forward(std::span<const double> input);

    // Pure evaluation; no cache is written. Safe on shared const instances.
    std::vector<double> infer(std::span<const double> input) const;

    // Backpropagates upstream_grad (d loss / d output) through the cached
    // forward pass. Throws StateError if forward() has not been called.
    Gradients backward(std::span<const double> upstream_grad,
                       bool want_input_grad = false) const;

    // --- batch path (explicit trace, used by the learner) ---

    Matrix forward_batch(const Matrix& input, ForwardTrace& trace) const;
    Matrix infer_batch(const Matrix& input) const;

    // Gradients are summed over the batch rows of upstream_grad.
    Gradients backward_batch(const ForwardTrace& trace,
                             const Matrix& upstream_grad,
                             bool want_input_grad = false) const;

    // --- structure and parameters ---

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t num_layers() const { return weights_.size(); }
    Activation output_activation() const { return output_act_; }

    std::vector<Matrix>& weights() { return weights_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    std::vector<std::vector<double>>& biases() { return biases_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    std::size_t parameter_count() const;
    bool same_shape(const DenseNet& other) const;
    bool equal_parameters(const DenseNet& other) const;

    // Largest absolute parameter difference; shapes must match.
    double max_parameter_distance(const DenseNet& other) const;

    Gradients zero_gradients() const;

    // --- serialization (versioned flat binary, see docs in README) ---
    void save(const std::string& path) const;
    static DenseNet load(const std::string& path);
    void save(std::ostream& os) const;
    static DenseNet load(std::istream& is);

private:
    DenseNet() = default;
    void check_sizes() const;
    void apply_activation(Matrix& m, Activation act) const;

    std::vector<std::size_t> sizes_;
    std::vector<Matrix> weights_;               // [out x in] per layer
    std::vector<std::vector<double>> biases_;   // [out] per layer
    Activation output_act_ = Activation::Tanh;
    std::optional<ForwardTrace> cache_;
};

// target <- tau * online + (1 - tau) * target, elementwise.
void soft_update(const DenseNet& online, DenseNet& target, double tau);

}  // namespace reachavoid
