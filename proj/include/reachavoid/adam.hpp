#pragma once

#include <vector>

#include "reachavoid/dense_net.hpp"
#include "reachavoid/matrix.hpp"

namespace reachavoid {

// Adam optimizer state for one DenseNet. Moment shapes mirror the network
// parameters; step_count drives bias correction.
struct AdamState {
    std::size_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<Matrix> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;

    static AdamState for_net(const DenseNet& net, double learning_rate);
};

// One bias-corrected Adam update. Gradients must be finite
// (throws NumericError otherwise) and shaped like the network.
void adam_step(DenseNet& net, const Gradients& grads, AdamState& opt);

}  // namespace reachavoid
