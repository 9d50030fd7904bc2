#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "reachavoid/dense_net.hpp"
#include "reachavoid/error.hpp"
#include "reachavoid/rng.hpp"

namespace {

using reachavoid::Activation;
using reachavoid::DenseNet;
using reachavoid::Gradients;
using reachavoid::Matrix;
using reachavoid::Rng;

// Independent forward pass with explicit loops. Also reports the smallest
// |preactivation| over ReLU layers so finite-difference checks can avoid
// inputs that sit on a kink.
std::vector<double> naive_forward(const DenseNet& net,
                                  std::span<const double> input,
                                  double* min_abs_preact = nullptr) {
    std::vector<double> x(input.begin(), input.end());
    double min_abs = 1e300;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const Matrix& w = net.weights()[l];
        const std::vector<double>& b = net.biases()[l];
        std::vector<double> z(w.rows, 0.0);
        for (std::size_t i = 0; i < w.rows; ++i) {
            double acc = b[i];
            for (std::size_t j = 0; j < w.cols; ++j) acc += w.at(i, j) * x[j];
            z[i] = acc;
        }
        const bool last = l + 1 == net.num_layers();
        const Activation act = last ? net.output_activation() : Activation::Relu;
        for (double& v : z) {
            if (act == Activation::Relu) {
                min_abs = std::min(min_abs, std::abs(v));
                v = v > 0.0 ? v : 0.0;
            } else if (act == Activation::Tanh) {
                v = std::tanh(v);
            }
        }
        x = std::move(z);
    }
    if (min_abs_preact) *min_abs_preact = min_abs;
    return x;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double rel_err(double a, double f) {
    return std::abs(a - f) / std::max({1.0, std::abs(a), std::abs(f)});
}

std::vector<std::size_t> random_sizes(Rng& rng) {
    std::vector<std::size_t> sizes;
    sizes.push_back(2 + rng.index(5));
    const std::size_t hidden = 1 + rng.index(3);
    for (std::size_t i = 0; i < hidden; ++i) sizes.push_back(3 + rng.index(8));
    sizes.push_back(1 + rng.index(4));
    return sizes;
}

// Picks an input whose ReLU preactivations all sit clear of zero, so a
// 1e-5 finite-difference step cannot cross a kink.
std::vector<double> safe_input(const DenseNet& net, Rng& rng) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<double> input(net.input_size());
        for (double& v : input) v = rng.uniform(-1.5, 1.5);
        double min_abs = 0.0;
        naive_forward(net, input, &min_abs);
        if (min_abs > 1e-3) return input;
    }
    REQUIRE_MESSAGE(false, "no kink-free input found");
    return {};
}

}  // namespace

TEST_CASE("infer matches an explicit-loop forward pass") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const Activation out_act =
            trial % 3 == 0 ? Activation::Identity
                           : (trial % 3 == 1 ? Activation::Tanh : Activation::Relu);
        DenseNet net(random_sizes(rng), out_act, rng);
        std::vector<double> input(net.input_size());
        for (double& v : input) v = rng.uniform(-2.0, 2.0);
        const std::vector<double> got = net.infer(input);
        const std::vector<double> want = naive_forward(net, input);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(202);
    const double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const Activation out_act =
            trial % 2 == 0 ? Activation::Tanh : Activation::Identity;
        DenseNet net(random_sizes(rng), out_act, rng);
        const std::vector<double> input = safe_input(net, rng);
        std::vector<double> upstream(net.output_size());
        for (double& v : upstream) v = rng.uniform(-1.0, 1.0);

        net.forward(input);
        const Gradients grads = net.backward(upstream, true);

        const auto loss = [&] { return dot(net.infer(input), upstream); };
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            Matrix& w = net.weights()[l];
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double saved = w.data[i];
                w.data[i] = saved + h;
                const double hi = loss();
                w.data[i] = saved - h;
                const double lo = loss();
                w.data[i] = saved;
                const double fd = (hi - lo) / (2.0 * h);
                worst = std::max(worst, rel_err(grads.weights[l].data[i], fd));
            }
            std::vector<double>& b = net.biases()[l];
            for (std::size_t i = 0; i < b.size(); ++i) {
                const double saved = b[i];
                b[i] = saved + h;
                const double hi = loss();
                b[i] = saved - h;
                const double lo = loss();
                b[i] = saved;
                const double fd = (hi - lo) / (2.0 * h);
                worst = std::max(worst, rel_err(grads.biases[l][i], fd));
            }
        }

        REQUIRE(grads.has_input_grad);
        std::vector<double> probe(input);
        for (std::size_t i = 0; i < probe.size(); ++i) {
            const double saved = probe[i];
            probe[i] = saved + h;
            const double hi = dot(net.infer(probe), upstream);
            probe[i] = saved - h;
            const double lo = dot(net.infer(probe), upstream);
            probe[i] = saved;
            const double fd = (hi - lo) / (2.0 * h);
            worst = std::max(worst, rel_err(grads.input.at(0, i), fd));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("batch backward sums per-sample gradients") {
    Rng rng(303);
    DenseNet net({4, 9, 6, 2}, Activation::Tanh, rng);
    const std::size_t batch = 5;
    Matrix input(batch, 4);
    Matrix upstream(batch, 2);
    for (double& v : input.data) v = rng.uniform(-1.0, 1.0);
    for (double& v : upstream.data) v = rng.uniform(-1.0, 1.0);

    reachavoid::ForwardTrace trace;
    const Matrix out = net.forward_batch(input, trace);
    const Gradients batch_grads = net.backward_batch(trace, upstream, true);

    Gradients want = net.zero_gradients();
    for (std::size_t r = 0; r < batch; ++r) {
        const std::span<const double> row(input.row(r), input.cols);
        const std::vector<double> single = net.forward(row);
        for (std::size_t j = 0; j < out.cols; ++j) {
            CHECK(out.at(r, j) == doctest::Approx(single[j]).epsilon(1e-12));
        }
        const Gradients g =
            net.backward(std::span<const double>(upstream.row(r), upstream.cols), true);
        for (std::size_t l = 0; l < want.weights.size(); ++l) {
            for (std::size_t i = 0; i < want.weights[l].size(); ++i) {
                want.weights[l].data[i] += g.weights[l].data[i];
            }
            for (std::size_t i = 0; i < want.biases[l].size(); ++i) {
                want.biases[l][i] += g.biases[l][i];
            }
        }
        for (std::size_t j = 0; j < input.cols; ++j) {
            CHECK(batch_grads.input.at(r, j) ==
                  doctest::Approx(g.input.at(0, j)).epsilon(1e-10));
        }
    }
    for (std::size_t l = 0; l < want.weights.size(); ++l) {
        for (std::size_t i = 0; i < want.weights[l].size(); ++i) {
            CHECK(batch_grads.weights[l].data[i] ==
                  doctest::Approx(want.weights[l].data[i]).epsilon(1e-10));
        }
        for (std::size_t i = 0; i < want.biases[l].size(); ++i) {
            CHECK(batch_grads.biases[l][i] ==
                  doctest::Approx(want.biases[l][i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("backward uses the most recent forward cache") {
    Rng rng(404);
    DenseNet net({3, 6, 2}, Activation::Identity, rng);
    const std::vector<double> x1 = {0.3, -0.4, 0.8};
    const std::vector<double> x2 = {-1.1, 0.2, 0.5};
    const std::vector<double> g = {1.0, -0.5};

    net.forward(x1);
    net.forward(x2);
    const Gradients after_two = net.backward(g);

    DenseNet copy = net;
    copy.forward(x2);
    const Gradients fresh = copy.backward(g);
    for (std::size_t l = 0; l < fresh.weights.size(); ++l) {
        for (std::size_t i = 0; i < fresh.weights[l].size(); ++i) {
            CHECK(after_two.weights[l].data[i] == fresh.weights[l].data[i]);
        }
    }
}

TEST_CASE("backward before forward is a state error") {
    Rng rng(1);
    DenseNet net({2, 3, 1}, Activation::Tanh, rng);
    CHECK_THROWS_AS(net.backward(std::vector<double>{1.0}),
                    reachavoid::StateError);
}

TEST_CASE("tanh head keeps outputs inside the unit box") {
    Rng rng(505);
    DenseNet net({5, 40, 40, 3}, Activation::Tanh, rng);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> input(5);
        for (double& v : input) v = rng.uniform(-50.0, 50.0);
        for (const double v : net.infer(input)) {
            CHECK(std::abs(v) <= 1.0);
        }
    }
}

TEST_CASE("initialization is seed-deterministic and fan-in bounded") {
    Rng a(7), b(7), c(8);
    DenseNet na({6, 12, 4}, Activation::Tanh, a);
    DenseNet nb({6, 12, 4}, Activation::Tanh, b);
    DenseNet nc({6, 12, 4}, Activation::Tanh, c);
    CHECK(na.equal_parameters(nb));
    CHECK_FALSE(na.equal_parameters(nc));

    for (std::size_t l = 0; l < na.num_layers(); ++l) {
        const double bound = 1.0 / std::sqrt(double(na.weights()[l].cols));
        for (const double v : na.weights()[l].data) {
            CHECK(std::abs(v) <= bound);
        }
        for (const double v : na.biases()[l]) {
            CHECK(std::abs(v) <= bound);
        }
    }
    CHECK(na.parameter_count() == 6 * 12 + 12 + 12 * 4 + 4);
}

TEST_CASE("stream and file round-trips preserve parameters exactly") {
    Rng rng(606);
    DenseNet net({7, 11, 5}, Activation::Identity, rng);

    std::stringstream ss;
    net.save(ss);
    const DenseNet back = DenseNet::load(ss);
    CHECK(back.equal_parameters(net));
    CHECK(back.output_activation() == net.output_activation());
    CHECK(back.layer_sizes() == net.layer_sizes());

    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "ra_test_net.ranet";
    net.save(path.string());
    const DenseNet from_file = DenseNet::load(path.string());
    CHECK(from_file.equal_parameters(net));
    std::filesystem::remove(path);

    std::stringstream garbage("definitely not a network blob");
    CHECK_THROWS_AS(DenseNet::load(garbage), reachavoid::IoError);
    CHECK_THROWS_AS(DenseNet::load(std::string("/nonexistent/net.ranet")),
                    reachavoid::IoError);
}

TEST_CASE("soft update interpolates and converges geometrically") {
    Rng rng(707);
    DenseNet online({4, 8, 2}, Activation::Tanh, rng);
    DenseNet target({4, 8, 2}, Activation::Tanh, rng);

    const double tau = 0.25;
    DenseNet expect = target;
    for (std::size_t l = 0; l < expect.num_layers(); ++l) {
        for (std::size_t i = 0; i < expect.weights()[l].size(); ++i) {
            expect.weights()[l].data[i] =
                tau * online.weights()[l].data[i] +
                (1.0 - tau) * target.weights()[l].data[i];
        }
        for (std::size_t i = 0; i < expect.biases()[l].size(); ++i) {
            expect.biases()[l][i] = tau * online.biases()[l][i] +
                                    (1.0 - tau) * target.biases()[l][i];
        }
    }
    DenseNet stepped = target;
    reachavoid::soft_update(online, stepped, tau);
    CHECK(stepped.max_parameter_distance(expect) == doctest::Approx(0.0));

    const double initial = target.max_parameter_distance(online);
    DenseNet tracking = target;
    for (int k = 1; k <= 12; ++k) {
        reachavoid::soft_update(online, tracking, tau);
        const double want = std::pow(1.0 - tau, k) * initial;
        CHECK(tracking.max_parameter_distance(online) ==
              doctest::Approx(want).epsilon(1e-9));
    }

    DenseNet snapped = target;
    reachavoid::soft_update(online, snapped, 1.0);
    CHECK(snapped.equal_parameters(online));
}
