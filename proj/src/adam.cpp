#include "reachavoid/adam.hpp"

#include <cmath>

#include "reachavoid/error.hpp"

namespace reachavoid {

AdamState AdamState::for_net(const DenseNet& net, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const Matrix& w = net.weights()[l];
        s.m_weights.emplace_back(w.rows, w.cols);
        s.v_weights.emplace_back(w.rows, w.cols);
        s.m_biases.emplace_back(net.biases()[l].size(), 0.0);
        s.v_biases.emplace_back(net.biases()[l].size(), 0.0);
    }
    return s;
}

namespace {

inline void adam_update_span(double* param, const double* grad, double* m,
                             double* v, std::size_t n, const AdamState& s,
                             double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        param[i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
    }
}

}  // namespace

void adam_step(DenseNet& net, const Gradients& grads, AdamState& opt) {
    if (grads.weights.size() != net.num_layers() ||
        opt.m_weights.size() != net.num_layers()) {
        throw ShapeError("adam_step: layer count mismatch");
    }
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        if (!grads.weights[l].same_shape(net.weights()[l]) ||
            grads.biases[l].size() != net.biases()[l].size()) {
            throw ShapeError("adam_step: gradient shape mismatch at layer " +
                             std::to_string(l));
        }
    }
    if (!grads.all_finite()) {
        throw NumericError("adam_step: non-finite gradient entries");
    }

    opt.step_count += 1;
    const double bc1 =
        1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
    const double bc2 =
        1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));

    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        adam_update_span(net.weights()[l].data.data(),
                         grads.weights[l].data.data(),
                         opt.m_weights[l].data.data(),
                         opt.v_weights[l].data.data(), net.weights()[l].size(),
                         opt, bc1, bc2);
        adam_update_span(net.biases()[l].data(), grads.biases[l].data(),
                         opt.m_biases[l].data(), opt.v_biases[l].data(),
                         net.biases()[l].size(), opt, bc1, bc2);
    }
}

}  // namespace reachavoid
