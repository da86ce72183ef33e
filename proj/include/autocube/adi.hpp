#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "autocube/checkpoint.hpp"
#include "autocube/cube.hpp"
#include "autocube/evaluator.hpp"
#include "autocube/nn.hpp"

namespace autocube::adi {

// One training input: a state produced by the j-th move of a reverse
// scramble, carrying its scramble count D(x) = j. Loss weight is 1/depth.
struct TrainingSample {
    CubeState state;
    int depth = 1;
    int sequence_index = 0;
};

struct Target {
    double value_target = 0;
    int policy_target = 0;  // action index attaining the max, lowest on ties
};

struct AdiConfig {
    int scramble_depth = 5;           // k: moves per sequence
    int sequences_per_iteration = 100;  // l: sequences per iteration (N = k*l)
    long iterations = 2000;           // M
    int batch_size = 100;
    long checkpoint_interval = 500;   // iterations between snapshots
    std::uint64_t seed = 1;
    int target_threads = 1;           // parallelism for target construction

    void validate() const;
};

// Full trainer configuration as read from a config file (see configs/).
struct TrainingConfig {
    nn::NetworkConfig network;
    AdiConfig adi;
    std::string scalar = "f64";  // "f64" or "f32"
};

TrainingConfig load_training_config(const std::string& path);
TrainingConfig parse_training_config(const std::string& text);
std::string serialize_training_config(const TrainingConfig& cfg);

// l reverse scrambles of k moves each; sample j of a sequence extends sample
// j-1 by one uniform move, and gets depth j. Exactly k*l samples, sequence
// by sequence.
std::vector<TrainingSample> generate_samples(int scramble_depth, int sequences,
                                             Rng& rng);

// Depth-1 lookahead target. A solved child scores exactly +1 (terminal, no
// network value added); any other child scores -1 + v(child). The value
// target is the max over the 12 actions, the policy target its argmax.
Target make_target(const Evaluator& eval, const CubeState& state);

// Batched variant; results are independent of thread count and identical to
// calling make_target per sample.
std::vector<Target> make_targets(const Evaluator& eval,
                                 std::span<const TrainingSample> samples,
                                 int threads = 1);

struct IterationStats {
    long iteration = 0;
    long samples_seen = 0;
    double loss = 0;
    double value_loss = 0;
    double policy_loss = 0;
    // index d-1 holds the mean over samples at depth d
    std::vector<double> mean_target_by_depth;
    std::vector<double> mean_abs_target_by_depth;
    double wall_ms = 0;
};

// One ADI iteration: generate N samples, freeze the current parameters to
// build all N targets, then run weighted minibatch RMSProp updates over a
// seeded shuffle of the fresh samples.
template <class Scalar>
IterationStats train_iteration(nn::NetworkParams<Scalar>& params,
                               const nn::NetworkConfig& net_cfg,
                               const AdiConfig& adi_cfg, long iteration_index);

extern template IterationStats train_iteration<double>(nn::NetworkParams<double>&,
                                                       const nn::NetworkConfig&,
                                                       const AdiConfig&, long);
extern template IterationStats train_iteration<float>(nn::NetworkParams<float>&,
                                                      const nn::NetworkConfig&,
                                                      const AdiConfig&, long);

struct RunSummary {
    long start_iteration = 0;
    long iterations_completed = 0;
    std::string final_checkpoint;
    std::string log_path;
    std::vector<IterationStats> stats;
};

// Runs M iterations with periodic checkpoints and a JSONL training log in
// out_dir. Resuming from a checkpoint reproduces the uninterrupted run
// bit-identically (per-iteration rng streams are derived from seed and
// iteration index). `progress` (optional) receives each iteration's stats.
RunSummary run_training(const TrainingConfig& cfg, const std::string& out_dir,
                        const std::string& resume_checkpoint = {},
                        std::ostream* progress = nullptr);

}  // namespace autocube::adi
