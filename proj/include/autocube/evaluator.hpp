#pragma once

#include <array>
#include <span>
#include <vector>

#include "autocube/cube.hpp"
#include "autocube/nn.hpp"

namespace autocube {

// Batched state evaluation behind a scalar-agnostic interface. Implementations
// must be pure functions of the state batch (safe for concurrent callers) and
// schedule-independent: the result for a state may not depend on what else is
// in the batch.
class Evaluator {
public:
    struct Result {
        std::vector<double> values;
        std::vector<std::array<double, kNumMoves>> policies;
    };

    virtual ~Evaluator() = default;

    virtual Result evaluate(std::span<const CubeState> states) const = 0;

    double value_of(const CubeState& s) const {
        return evaluate(std::span(&s, 1)).values[0];
    }
};

template <class Scalar>
class NetworkEvaluator final : public Evaluator {
public:
    explicit NetworkEvaluator(const nn::NetworkParams<Scalar>& params)
        : params_(&params) {}

    Result evaluate(std::span<const CubeState> states) const override {
        std::vector<EncodedState> encoded;
        encoded.reserve(states.size());
        for (const CubeState& s : states) encoded.push_back(encode(s));
        const nn::BatchOutput<Scalar> out = nn::forward_batch(*params_, encoded);
        Result r;
        r.values.resize(states.size());
        r.policies.resize(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) {
            r.values[i] = static_cast<double>(out.values[static_cast<Eigen::Index>(i)]);
            for (int a = 0; a < kNumMoves; ++a)
                r.policies[i][static_cast<std::size_t>(a)] =
                    static_cast<double>(out.policies(a, static_cast<Eigen::Index>(i)));
        }
        return r;
    }

private:
    const nn::NetworkParams<Scalar>* params_;
};

}  // namespace autocube
