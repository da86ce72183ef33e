#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "autocube/cube.hpp"
#include "autocube/rng.hpp"

namespace autocube::nn {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Fully connected trunk with elu activations feeding a scalar value head and
// a 12-way policy head; both head outputs are linear (softmax applied to the
// policy at inference/loss time). Head size lists exclude the final output
// layer, which is implied (1 and 12 units respectively).
struct NetworkConfig {
    std::vector<int> body_layers = {4096, 2048};
    std::vector<int> value_head = {512};
    std::vector<int> policy_head = {512};
    int input_size = EncodedState::kFlat;  // 480
    int policy_outputs = kNumMoves;        // 12

    double learning_rate = 1e-4;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
    double policy_loss_weight = 1.0;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;

    void validate() const {
        if (input_size != EncodedState::kFlat)
            throw std::invalid_argument("network config: input_size must be 480");
        if (policy_outputs != kNumMoves)
            throw std::invalid_argument("network config: policy_outputs must be 12");
        auto check_sizes = [](const std::vector<int>& sizes, const char* name) {
            for (int s : sizes)
                if (s < 1)
                    throw std::invalid_argument(std::string("network config: ") + name +
                                                " sizes must be >= 1");
        };
        check_sizes(body_layers, "body");
        check_sizes(value_head, "value head");
        check_sizes(policy_head, "policy head");
        if (learning_rate <= 0 || rmsprop_epsilon <= 0 || rmsprop_decay <= 0 ||
            rmsprop_decay >= 1)
            throw std::invalid_argument("network config: bad optimizer hyperparameters");
        if (policy_loss_weight < 0)
            throw std::invalid_argument("network config: negative policy loss weight");
    }

    static NetworkConfig desk() {
        NetworkConfig c;
        c.body_layers = {256, 128};
        c.value_head = {64};
        c.policy_head = {64};
        return c;
    }
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

template <class Scalar>
struct Dense {
    MatrixX<Scalar> weights;  // rows = outputs, cols = inputs
    VectorX<Scalar> bias;
};

// Weights, biases and the RMSProp accumulators that travel with them.
// Serialized layer order: body, value head (hidden then output), policy head
// (hidden then output).
template <class Scalar>
struct NetworkParams {
    std::vector<Dense<Scalar>> body;
    std::vector<Dense<Scalar>> value_head;    // last element outputs 1 unit
    std::vector<Dense<Scalar>> policy_head;   // last element outputs 12 units
    std::vector<Dense<Scalar>> rms;           // accumulators, serialized order

    std::size_t layer_count() const {
        return body.size() + value_head.size() + policy_head.size();
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto* section : {&body, &value_head, &policy_head})
            for (const auto& layer : *section)
                n += static_cast<std::size_t>(layer.weights.size()) +
                     static_cast<std::size_t>(layer.bias.size());
        return n;
    }

    template <class Fn>
    void for_each_layer(Fn&& fn) {
        for (auto* section : {&body, &value_head, &policy_head})
            for (auto& layer : *section) fn(layer);
    }
    template <class Fn>
    void for_each_layer(Fn&& fn) const {
        for (const auto* section : {&body, &value_head, &policy_head})
            for (const auto& layer : *section) fn(layer);
    }
};

// Layer output sizes in serialized order, derived from the config.
inline std::vector<std::pair<int, int>> layer_shapes(const NetworkConfig& cfg) {
    std::vector<std::pair<int, int>> shapes;  // (outputs, inputs)
    int in = cfg.input_size;
    for (int out : cfg.body_layers) {
        shapes.emplace_back(out, in);
        in = out;
    }
    const int body_out = in;
    in = body_out;
    for (int out : cfg.value_head) {
        shapes.emplace_back(out, in);
        in = out;
    }
    shapes.emplace_back(1, in);
    in = body_out;
    for (int out : cfg.policy_head) {
        shapes.emplace_back(out, in);
        in = out;
    }
    shapes.emplace_back(cfg.policy_outputs, in);
    return shapes;
}

// Glorot-uniform weights (variance 2/(fan_in+fan_out)), zero biases, zero
// accumulators. The rng is consumed in serialized layer order, column-major
// within each weight matrix, so equal seeds give identical parameters.
template <class Scalar>
NetworkParams<Scalar> init_params(const NetworkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(mix64(seed, 0x6e657477ULL));
    NetworkParams<Scalar> p;
    const auto shapes = layer_shapes(cfg);
    const std::size_t body_n = cfg.body_layers.size();
    const std::size_t value_n = cfg.value_head.size() + 1;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        auto [out, in] = shapes[i];
        Dense<Scalar> layer;
        layer.weights.resize(out, in);
        const double limit = std::sqrt(6.0 / (in + out));
        Scalar* data = layer.weights.data();
        for (Eigen::Index k = 0; k < layer.weights.size(); ++k)
            data[k] = static_cast<Scalar>(rng.symmetric(limit));
        layer.bias = VectorX<Scalar>::Zero(out);

        Dense<Scalar> acc;
        acc.weights = MatrixX<Scalar>::Zero(out, in);
        acc.bias = VectorX<Scalar>::Zero(out);
        p.rms.push_back(std::move(acc));

        if (i < body_n)
            p.body.push_back(std::move(layer));
        else if (i < body_n + value_n)
            p.value_head.push_back(std::move(layer));
        else
            p.policy_head.push_back(std::move(layer));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& where, const std::string& what)
        : std::runtime_error("non-finite values in " + where + ": " + what),
          where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

namespace detail {

template <class Scalar>
void check_finite(const MatrixX<Scalar>& m, const char* section, std::size_t index) {
    if (!m.allFinite())
        throw NumericError(std::string(section) + "[" + std::to_string(index) + "]",
                           "forward activation");
}

template <class Scalar>
void elu_inplace(MatrixX<Scalar>& m) {
    m = m.array().max(Scalar(0)) +
        (m.array().min(Scalar(0)).exp() - Scalar(1));
}

// derivative of elu expressed through its output: 1 where y>0, y+1 elsewhere
template <class Scalar>
MatrixX<Scalar> elu_derivative_from_output(const MatrixX<Scalar>& y) {
    return (y.array().min(Scalar(0)) + Scalar(1)).matrix();
}

// First layer exploits the one-hot input: the pre-activation of sample j is
// the sum of the 20 weight columns picked out by the encoding, plus bias.
template <class Scalar>
MatrixX<Scalar> input_layer(const Dense<Scalar>& layer,
                            std::span<const EncodedState> batch) {
    const Eigen::Index out = layer.weights.rows();
    MatrixX<Scalar> h(out, static_cast<Eigen::Index>(batch.size()));
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
        auto col = h.col(j);
        col = layer.bias;
        const EncodedState& e = batch[static_cast<std::size_t>(j)];
        for (int r = 0; r < EncodedState::kRows; ++r)
            col += layer.weights.col(r * EncodedState::kCols + e.hot[r]);
    }
    return h;
}

template <class Scalar>
MatrixX<Scalar> dense_layer(const Dense<Scalar>& layer, const MatrixX<Scalar>& x) {
    MatrixX<Scalar> h = (layer.weights * x).colwise() + layer.bias;
    return h;
}

// Column-wise softmax with max subtraction.
template <class Scalar>
MatrixX<Scalar> softmax_columns(const MatrixX<Scalar>& logits) {
    MatrixX<Scalar> p = logits;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        auto col = p.col(j).array();
        col -= col.maxCoeff();
        col = col.exp();
        col /= col.sum();
    }
    return p;
}

}  // namespace detail

template <class Scalar>
struct BatchOutput {
    VectorX<Scalar> values;      // one raw (unsquashed) value per sample
    MatrixX<Scalar> policies;    // 12 x batch, softmax probabilities
};

struct Prediction {
    double value = 0;
    std::array<double, kNumMoves> policy{};
};

template <class Scalar>
BatchOutput<Scalar> forward_batch(const NetworkParams<Scalar>& params,
                                  std::span<const EncodedState> batch) {
    if (batch.empty()) return {VectorX<Scalar>(0), MatrixX<Scalar>(kNumMoves, 0)};
    if (params.body.empty()) throw std::logic_error("forward: uninitialized params");

    MatrixX<Scalar> h = detail::input_layer(params.body[0], batch);
    detail::elu_inplace(h);
    detail::check_finite(h, "body", 0);
    for (std::size_t i = 1; i < params.body.size(); ++i) {
        h = detail::dense_layer(params.body[i], h);
        detail::elu_inplace(h);
        detail::check_finite(h, "body", i);
    }

    MatrixX<Scalar> v = h;
    for (std::size_t i = 0; i + 1 < params.value_head.size(); ++i) {
        v = detail::dense_layer(params.value_head[i], v);
        detail::elu_inplace(v);
        detail::check_finite(v, "value", i);
    }
    v = detail::dense_layer(params.value_head.back(), v);
    detail::check_finite(v, "value", params.value_head.size() - 1);

    MatrixX<Scalar> p = h;
    for (std::size_t i = 0; i + 1 < params.policy_head.size(); ++i) {
        p = detail::dense_layer(params.policy_head[i], p);
        detail::elu_inplace(p);
        detail::check_finite(p, "policy", i);
    }
    p = detail::dense_layer(params.policy_head.back(), p);
    detail::check_finite(p, "policy", params.policy_head.size() - 1);

    BatchOutput<Scalar> out;
    out.values = v.row(0).transpose();
    out.policies = detail::softmax_columns(p);
    return out;
}

template <class Scalar>
Prediction forward(const NetworkParams<Scalar>& params, const EncodedState& state) {
    const BatchOutput<Scalar> out = forward_batch(params, std::span(&state, 1));
    Prediction pred;
    pred.value = static_cast<double>(out.values[0]);
    for (int a = 0; a < kNumMoves; ++a)
        pred.policy[static_cast<std::size_t>(a)] = static_cast<double>(out.policies(a, 0));
    return pred;
}

// ---------------------------------------------------------------------------
// Loss and gradients
// ---------------------------------------------------------------------------

// One supervised batch: per sample a one-hot encoded state, a scalar value
// target, the argmax action index, and a positive weight. Weights are
// normalized by their batch sum inside the loss.
template <class Scalar>
struct TrainingBatch {
    std::vector<EncodedState> inputs;
    VectorX<Scalar> value_targets;
    std::vector<int> policy_targets;
    VectorX<Scalar> weights;

    Eigen::Index size() const { return value_targets.size(); }
};

struct LossBreakdown {
    double total = 0;
    double value_mse = 0;
    double policy_ce = 0;
};

template <class Scalar>
struct Gradients {
    std::vector<Dense<Scalar>> layers;  // serialized layer order
};

namespace detail {

template <class Scalar>
void backprop_dense(const Dense<Scalar>& layer, const MatrixX<Scalar>& input_act,
                    const MatrixX<Scalar>& delta, Dense<Scalar>& grad,
                    MatrixX<Scalar>* delta_prev) {
    grad.weights.noalias() = delta * input_act.transpose();
    grad.bias = delta.rowwise().sum();
    if (delta_prev) delta_prev->noalias() = layer.weights.transpose() * delta;
}

}  // namespace detail

// Weighted combined loss
//   L = sum_i w~_i [ (v_i - yv_i)^2 + beta * CE(softmax(logits_i), yp_i) ]
// with w~ = w / sum(w). Returns the breakdown and fills `grads` (allocated
// on first use) in serialized layer order.
template <class Scalar>
LossBreakdown loss_and_gradients(const NetworkParams<Scalar>& params,
                                 const TrainingBatch<Scalar>& batch,
                                 const NetworkConfig& cfg,
                                 Gradients<Scalar>& grads) {
    const Eigen::Index b = batch.size();
    if (b == 0) throw std::invalid_argument("loss: empty batch");
    if (static_cast<Eigen::Index>(batch.inputs.size()) != b ||
        static_cast<Eigen::Index>(batch.policy_targets.size()) != b ||
        batch.weights.size() != b)
        throw std::invalid_argument("loss: inconsistent batch fields");
    if ((batch.weights.array() <= Scalar(0)).any())
        throw std::invalid_argument("loss: weights must be positive");

    // forward, caching post-activation of every layer
    std::vector<MatrixX<Scalar>> body_acts;
    body_acts.reserve(params.body.size());
    {
        MatrixX<Scalar> h = detail::input_layer(params.body[0], batch.inputs);
        detail::elu_inplace(h);
        detail::check_finite(h, "body", 0);
        body_acts.push_back(std::move(h));
    }
    for (std::size_t i = 1; i < params.body.size(); ++i) {
        MatrixX<Scalar> h = detail::dense_layer(params.body[i], body_acts.back());
        detail::elu_inplace(h);
        detail::check_finite(h, "body", i);
        body_acts.push_back(std::move(h));
    }

    std::vector<MatrixX<Scalar>> value_acts;  // hidden activations only
    MatrixX<Scalar> cur = body_acts.back();
    for (std::size_t i = 0; i + 1 < params.value_head.size(); ++i) {
        cur = detail::dense_layer(params.value_head[i], cur);
        detail::elu_inplace(cur);
        detail::check_finite(cur, "value", i);
        value_acts.push_back(cur);
    }
    const MatrixX<Scalar> value_out = detail::dense_layer(
        params.value_head.back(),
        value_acts.empty() ? body_acts.back() : value_acts.back());

    std::vector<MatrixX<Scalar>> policy_acts;
    cur = body_acts.back();
    for (std::size_t i = 0; i + 1 < params.policy_head.size(); ++i) {
        cur = detail::dense_layer(params.policy_head[i], cur);
        detail::elu_inplace(cur);
        detail::check_finite(cur, "policy", i);
        policy_acts.push_back(cur);
    }
    const MatrixX<Scalar> logits = detail::dense_layer(
        params.policy_head.back(),
        policy_acts.empty() ? body_acts.back() : policy_acts.back());

    // normalized weights and loss terms
    const Scalar weight_sum = batch.weights.sum();
    VectorX<Scalar> wn = batch.weights / weight_sum;

    const auto residual = (value_out.row(0).transpose() - batch.value_targets).eval();
    const double value_mse =
        static_cast<double>((wn.array() * residual.array().square()).sum());

    MatrixX<Scalar> probs = detail::softmax_columns(logits);
    double policy_ce = 0;
    for (Eigen::Index j = 0; j < b; ++j) {
        const int target = batch.policy_targets[static_cast<std::size_t>(j)];
        if (target < 0 || target >= kNumMoves)
            throw std::invalid_argument("loss: policy target out of range");
        const auto col = logits.col(j).array();
        const Scalar mx = col.maxCoeff();
        const Scalar lse = mx + std::log((col - mx).exp().sum());
        policy_ce += static_cast<double>(wn[j]) *
                     static_cast<double>(lse - logits(target, j));
    }

    LossBreakdown loss;
    loss.value_mse = value_mse;
    loss.policy_ce = policy_ce;
    loss.total = value_mse + cfg.policy_loss_weight * policy_ce;
    if (!std::isfinite(loss.total))
        throw NumericError("loss", "total loss is not finite");

    // output deltas
    MatrixX<Scalar> dv(1, b);
    dv.row(0) = (Scalar(2) * wn.array() * residual.array()).matrix().transpose();

    MatrixX<Scalar> dz = probs;
    for (Eigen::Index j = 0; j < b; ++j) {
        dz(batch.policy_targets[static_cast<std::size_t>(j)], j) -= Scalar(1);
        dz.col(j) *= static_cast<Scalar>(cfg.policy_loss_weight) * wn[j];
    }

    // allocate gradient storage lazily, matching parameter shapes
    const std::size_t n_layers = params.layer_count();
    if (grads.layers.size() != n_layers) {
        grads.layers.clear();
        grads.layers.resize(n_layers);
        std::size_t k = 0;
        params.for_each_layer([&](const Dense<Scalar>& layer) {
            grads.layers[k].weights.resize(layer.weights.rows(), layer.weights.cols());
            grads.layers[k].bias.resize(layer.bias.size());
            ++k;
        });
    }
    const std::size_t body_n = params.body.size();
    const std::size_t value_n = params.value_head.size();

    auto head_input = [&](const std::vector<MatrixX<Scalar>>& acts,
                          std::size_t i) -> const MatrixX<Scalar>& {
        return i == 0 ? body_acts.back() : acts[i - 1];
    };

    // value head backward
    MatrixX<Scalar> delta = dv;
    MatrixX<Scalar> body_delta = MatrixX<Scalar>::Zero(body_acts.back().rows(), b);
    for (std::size_t i = params.value_head.size(); i-- > 0;) {
        const MatrixX<Scalar>& input_act = head_input(value_acts, i);
        MatrixX<Scalar> prev;
        detail::backprop_dense(params.value_head[i], input_act, delta,
                               grads.layers[body_n + i], &prev);
        if (i == 0) {
            body_delta += prev;
        } else {
            delta = prev.cwiseProduct(detail::elu_derivative_from_output(value_acts[i - 1]));
        }
    }

    // policy head backward
    delta = dz;
    for (std::size_t i = params.policy_head.size(); i-- > 0;) {
        const MatrixX<Scalar>& input_act = head_input(policy_acts, i);
        MatrixX<Scalar> prev;
        detail::backprop_dense(params.policy_head[i], input_act, delta,
                               grads.layers[body_n + value_n + i], &prev);
        if (i == 0) {
            body_delta += prev;
        } else {
            delta = prev.cwiseProduct(
                detail::elu_derivative_from_output(policy_acts[i - 1]));
        }
    }

    // body backward
    delta = body_delta.cwiseProduct(detail::elu_derivative_from_output(body_acts.back()));
    for (std::size_t i = params.body.size(); i-- > 1;) {
        MatrixX<Scalar> prev;
        detail::backprop_dense(params.body[i], body_acts[i - 1], delta,
                               grads.layers[i], &prev);
        delta = prev.cwiseProduct(detail::elu_derivative_from_output(body_acts[i - 1]));
    }
    // input layer: scatter-add the one-hot columns
    {
        Dense<Scalar>& g0 = grads.layers[0];
        g0.weights.setZero();
        g0.bias = delta.rowwise().sum();
        for (Eigen::Index j = 0; j < b; ++j) {
            const EncodedState& e = batch.inputs[static_cast<std::size_t>(j)];
            for (int r = 0; r < EncodedState::kRows; ++r)
                g0.weights.col(r * EncodedState::kCols + e.hot[r]) += delta.col(j);
        }
    }
    return loss;
}

// ---------------------------------------------------------------------------
// RMSProp
// ---------------------------------------------------------------------------

// acc <- decay*acc + (1-decay)*g^2;  param <- param - lr * g / sqrt(acc+eps)
template <class Scalar>
void rmsprop_step(NetworkParams<Scalar>& params, const Gradients<Scalar>& grads,
                  const NetworkConfig& cfg) {
    if (grads.layers.size() != params.layer_count())
        throw std::invalid_argument("rmsprop: gradient/parameter shape mismatch");
    const auto decay = static_cast<Scalar>(cfg.rmsprop_decay);
    const auto lr = static_cast<Scalar>(cfg.learning_rate);
    const auto eps = static_cast<Scalar>(cfg.rmsprop_epsilon);
    std::size_t k = 0;
    params.for_each_layer([&](Dense<Scalar>& layer) {
        Dense<Scalar>& acc = params.rms[k];
        const Dense<Scalar>& g = grads.layers[k];
        acc.weights.array() =
            decay * acc.weights.array() + (1 - decay) * g.weights.array().square();
        acc.bias.array() =
            decay * acc.bias.array() + (1 - decay) * g.bias.array().square();
        layer.weights.array() -=
            lr * g.weights.array() / (acc.weights.array() + eps).sqrt();
        layer.bias.array() -= lr * g.bias.array() / (acc.bias.array() + eps).sqrt();
        ++k;
    });
}

}  // namespace autocube::nn
