#include "reachavoid/dense_net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "reachavoid/error.hpp"

namespace reachavoid {

namespace {

constexpr char kNetMagic[8] = {'R', 'A', 'N', 'E', 'T', 'B', '\0', '\0'};
constexpr std::uint32_t kNetFormatVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, const double* p, std::size_t n) {
    // IEEE-754 little-endian; written bitwise so files are portable.
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &p[i], 8);
        unsigned char b[8];
        for (int k = 0; k < 8; ++k)
            b[k] = static_cast<unsigned char>(bits >> (8 * k));
        os.write(reinterpret_cast<const char*>(b), 8);
    }
}

void read_f64(std::istream& is, double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        unsigned char b[8];
        is.read(reinterpret_cast<char*>(b), 8);
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k)
            bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
        std::memcpy(&p[i], &bits, 8);
    }
}

}  // namespace

bool Gradients::all_finite() const {
    for (const Matrix& m : weights) {
        if (!m.all_finite()) return false;
    }
    for (const auto& b : biases) {
        for (double v : b) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

DenseNet::DenseNet(std::vector<std::size_t> sizes, Activation output_activation,
                   Rng& rng)
    : sizes_(std::move(sizes)), output_act_(output_activation) {
    check_sizes();
    const std::size_t layers = sizes_.size() - 1;
    weights_.reserve(layers);
    biases_.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = sizes_[l], out = sizes_[l + 1];
        Matrix w(out, in);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        weights_.push_back(std::move(w));
        std::vector<double> b(out);
        for (double& v : b) v = rng.uniform(-bound, bound);
        biases_.push_back(std::move(b));
    }
}

DenseNet DenseNet::zeros(std::vector<std::size_t> sizes,
                         Activation output_activation) {
    DenseNet net;
    net.sizes_ = std::move(sizes);
    net.output_act_ = output_activation;
    net.check_sizes();
    for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
        net.weights_.emplace_back(net.sizes_[l + 1], net.sizes_[l]);
        net.biases_.emplace_back(net.sizes_[l + 1], 0.0);
    }
    return net;
}

void DenseNet::check_sizes() const {
    if (sizes_.size() < 2) {
        throw ShapeError("DenseNet needs at least input and output sizes");
    }
    for (std::size_t s : sizes_) {
        if (s == 0) throw ShapeError("DenseNet layer size must be positive");
    }
}

void DenseNet::apply_activation(Matrix& m, Activation act) const {
    switch (act) {
        case Activation::Relu:
            for (double& v : m.data) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::Tanh:
            for (double& v : m.data) v = std::tanh(v);
            break;
        case Activation::Identity:
            break;
    }
}

Matrix DenseNet::forward_batch(const Matrix& input, ForwardTrace& trace) const {
    if (input.cols != input_size()) {
        throw ShapeError("forward: input width " + std::to_string(input.cols) +
                         " != " + std::to_string(input_size()));
    }
    trace.acts.clear();
    trace.acts.reserve(num_layers() + 1);
    trace.acts.push_back(input);
    for (std::size_t l = 0; l < num_layers(); ++l) {
        Matrix z(trace.acts[l].rows, sizes_[l + 1]);
        for (std::size_t i = 0; i < z.rows; ++i) {
            std::memcpy(z.row(i), biases_[l].data(), z.cols * sizeof(double));
        }
        gemm(false, true, 1.0, trace.acts[l], weights_[l], 1.0, z);
        apply_activation(z, l + 1 == num_layers() ? output_act_
                                                  : Activation::Relu);
        trace.acts.push_back(std::move(z));
    }
    return trace.acts.back();
}

Matrix DenseNet::infer_batch(const Matrix& input) const {
    ForwardTrace t;
    return forward_batch(input, t);
}

std::vector<double> DenseNet::forward(std::span<const double> input) {
    Matrix in(1, input.size());
    std::copy(input.begin(), input.end(), in.data.begin());
    cache_.emplace();
    Matrix out = forward_batch(in, *cache_);
    return out.data;
}

std::vector<double> DenseNet::infer(std::span<const double> input) const {
    Matrix in(1, input.size());
    std::copy(input.begin(), input.end(), in.data.begin());
    return infer_batch(in).data;
}

Gradients DenseNet::backward_batch(const ForwardTrace& trace,
                                   const Matrix& upstream_grad,
                                   bool want_input_grad) const {
    if (trace.acts.size() != num_layers() + 1) {
        throw StateError("backward called without a matching forward trace");
    }
    if (upstream_grad.rows != trace.acts[0].rows ||
        upstream_grad.cols != output_size()) {
        throw ShapeError("backward: upstream gradient shape mismatch");
    }

    Gradients g;
    g.weights.resize(num_layers());
    g.biases.resize(num_layers());

    // delta = d loss / d pre-activation of the current layer
    Matrix delta = upstream_grad;
    for (std::size_t li = num_layers(); li-- > 0;) {
        const Matrix& out_act = trace.acts[li + 1];
        const Activation act =
            li + 1 == num_layers() ? output_act_ : Activation::Relu;
        switch (act) {
            case Activation::Relu:
                for (std::size_t i = 0; i < delta.size(); ++i) {
                    if (out_act.data[i] <= 0.0) delta.data[i] = 0.0;
                }
                break;
            case Activation::Tanh:
                for (std::size_t i = 0; i < delta.size(); ++i) {
                    const double t = out_act.data[i];
                    delta.data[i] *= 1.0 - t * t;
                }
                break;
            case Activation::Identity:
                break;
        }

        const Matrix& x = trace.acts[li];
        Matrix dw(weights_[li].rows, weights_[li].cols);
        gemm(true, false, 1.0, delta, x, 0.0, dw);  // dW = delta^T * x
        g.weights[li] = std::move(dw);

        std::vector<double> db(weights_[li].rows, 0.0);
        for (std::size_t r = 0; r < delta.rows; ++r) {
            const double* row = delta.row(r);
            for (std::size_t j = 0; j < delta.cols; ++j) db[j] += row[j];
        }
        g.biases[li] = std::move(db);

        if (li > 0 || want_input_grad) {
            Matrix dx(delta.rows, weights_[li].cols);
            gemm(false, false, 1.0, delta, weights_[li], 0.0, dx);
            delta = std::move(dx);
        }
    }
    if (want_input_grad) {
        g.input = std::move(delta);
        g.has_input_grad = true;
    }
    return g;
}

Gradients DenseNet::backward(std::span<const double> upstream_grad,
                             bool want_input_grad) const {
    if (!cache_.has_value()) {
        throw StateError("backward called before forward");
    }
    if (upstream_grad.size() != output_size()) {
        throw ShapeError("backward: upstream gradient length " +
                         std::to_string(upstream_grad.size()) + " != " +
                         std::to_string(output_size()));
    }
    Matrix up(1, upstream_grad.size());
    std::copy(upstream_grad.begin(), upstream_grad.end(), up.data.begin());
    return backward_batch(*cache_, up, want_input_grad);
}

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        n += weights_[l].size() + biases_[l].size();
    }
    return n;
}

bool DenseNet::same_shape(const DenseNet& other) const {
    return sizes_ == other.sizes_ && output_act_ == other.output_act_;
}

bool DenseNet::equal_parameters(const DenseNet& other) const {
    if (!same_shape(other)) return false;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        if (weights_[l].data != other.weights_[l].data) return false;
        if (biases_[l] != other.biases_[l]) return false;
    }
    return true;
}

double DenseNet::max_parameter_distance(const DenseNet& other) const {
    if (!same_shape(other)) {
        throw ShapeError("max_parameter_distance: shape mismatch");
    }
    double d = 0.0;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        for (std::size_t i = 0; i < weights_[l].size(); ++i) {
            d = std::max(d, std::abs(weights_[l].data[i] -
                                     other.weights_[l].data[i]));
        }
        for (std::size_t i = 0; i < biases_[l].size(); ++i) {
            d = std::max(d, std::abs(biases_[l][i] - other.biases_[l][i]));
        }
    }
    return d;
}

Gradients DenseNet::zero_gradients() const {
    Gradients g;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        g.weights.emplace_back(weights_[l].rows, weights_[l].cols);
        g.biases.emplace_back(biases_[l].size(), 0.0);
    }
    return g;
}

void DenseNet::save(std::ostream& os) const {
    os.write(kNetMagic, sizeof(kNetMagic));
    write_u32(os, kNetFormatVersion);
    write_u32(os, static_cast<std::uint32_t>(sizes_.size()));
    for (std::size_t s : sizes_) write_u32(os, static_cast<std::uint32_t>(s));
    write_u32(os, static_cast<std::uint32_t>(Activation::Relu));
    write_u32(os, static_cast<std::uint32_t>(output_act_));
    for (std::size_t l = 0; l < num_layers(); ++l) {
        write_f64(os, weights_[l].data.data(), weights_[l].size());
        write_f64(os, biases_[l].data(), biases_[l].size());
    }
    if (!os) throw IoError("network write failed");
}

void DenseNet::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    save(os);
    if (!os) throw IoError("write failed: " + path);
}

DenseNet DenseNet::load(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kNetMagic, sizeof(kNetMagic)) != 0) {
        throw IoError("not a network blob");
    }
    const std::uint32_t version = read_u32(is);
    if (version != kNetFormatVersion) {
        throw IoError("unsupported network format version " +
                      std::to_string(version));
    }
    const std::uint32_t n_sizes = read_u32(is);
    if (n_sizes < 2 || n_sizes > 64) throw IoError("corrupt layer count");
    std::vector<std::size_t> sizes(n_sizes);
    for (auto& s : sizes) s = read_u32(is);
    const std::uint32_t hidden_act = read_u32(is);
    const std::uint32_t output_act = read_u32(is);
    if (hidden_act != static_cast<std::uint32_t>(Activation::Relu) ||
        output_act > 2) {
        throw IoError("unsupported activation encoding");
    }
    DenseNet net = DenseNet::zeros(sizes, static_cast<Activation>(output_act));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        read_f64(is, net.weights_[l].data.data(), net.weights_[l].size());
        read_f64(is, net.biases_[l].data(), net.biases_[l].size());
    }
    if (!is) throw IoError("truncated network blob");
    return net;
}

DenseNet DenseNet::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    try {
        return load(is);
    } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + ": " + path);
    }
}

void soft_update(const DenseNet& online, DenseNet& target, double tau) {
    if (!online.same_shape(target)) {
        throw ShapeError("soft_update: network shapes differ");
    }
    for (std::size_t l = 0; l < online.num_layers(); ++l) {
        const Matrix& wo = online.weights()[l];
        Matrix& wt = target.weights()[l];
        for (std::size_t i = 0; i < wo.size(); ++i) {
            wt.data[i] = tau * wo.data[i] + (1.0 - tau) * wt.data[i];
        }
        const auto& bo = online.biases()[l];
        auto& bt = target.biases()[l];
        for (std::size_t i = 0; i < bo.size(); ++i) {
            bt[i] = tau * bo[i] + (1.0 - tau) * bt[i];
        }
    }
}

}  // namespace reachavoid
