#include "autocube/adi.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "autocube/config.hpp"

namespace autocube::adi {

namespace {

using json = nlohmann::json;

// Fixed chunk size for target construction; chunk boundaries never depend on
// the thread count, so results are identical for any parallelism degree.
constexpr std::size_t kTargetChunk = 64;

Target target_from_children(std::span<const CubeState> children,
                            std::span<const double> child_values) {
    Target t;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumMoves; ++a) {
        const double score = is_solved(children[static_cast<std::size_t>(a)])
                                 ? 1.0
                                 : -1.0 + child_values[static_cast<std::size_t>(a)];
        if (score > best) {
            best = score;
            t.policy_target = a;
        }
    }
    t.value_target = best;
    return t;
}

void targets_for_chunk(const Evaluator& eval,
                       std::span<const TrainingSample> samples,
                       std::span<Target> out) {
    std::vector<CubeState> children;
    children.reserve(samples.size() * kNumMoves);
    for (const TrainingSample& sample : samples)
        for (Move m : kAllMoves) children.push_back(apply_move(sample.state, m));
    const Evaluator::Result result = eval.evaluate(children);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = target_from_children(
            std::span(children).subspan(i * kNumMoves, kNumMoves),
            std::span(result.values).subspan(i * kNumMoves, kNumMoves));
    }
}

}  // namespace

void AdiConfig::validate() const {
    if (scramble_depth < 1)
        throw std::invalid_argument("adi config: scramble_depth (k) must be >= 1");
    if (sequences_per_iteration < 1)
        throw std::invalid_argument("adi config: sequences_per_iteration (l) must be >= 1");
    if (iterations < 0)
        throw std::invalid_argument("adi config: iterations (M) must be >= 0");
    if (batch_size < 1)
        throw std::invalid_argument("adi config: batch_size must be >= 1");
    if (checkpoint_interval < 1)
        throw std::invalid_argument("adi config: checkpoint_interval must be >= 1");
    if (target_threads < 1)
        throw std::invalid_argument("adi config: target_threads must be >= 1");
}

std::vector<TrainingSample> generate_samples(int scramble_depth, int sequences,
                                             Rng& rng) {
    if (scramble_depth < 1 || sequences < 1)
        throw std::invalid_argument("generate_samples: k and l must be >= 1");
    std::vector<TrainingSample> samples;
    samples.reserve(static_cast<std::size_t>(scramble_depth) *
                    static_cast<std::size_t>(sequences));
    for (int seq = 0; seq < sequences; ++seq) {
        CubeState s = solved_state();
        for (int depth = 1; depth <= scramble_depth; ++depth) {
            s = apply_move(s, move_from_index(static_cast<int>(rng.below(kNumMoves))));
            samples.push_back({s, depth, seq});
        }
    }
    return samples;
}

Target make_target(const Evaluator& eval, const CubeState& state) {
    std::vector<CubeState> children;
    children.reserve(kNumMoves);
    for (Move m : kAllMoves) children.push_back(apply_move(state, m));
    const Evaluator::Result result = eval.evaluate(children);
    return target_from_children(children, result.values);
}

std::vector<Target> make_targets(const Evaluator& eval,
                                 std::span<const TrainingSample> samples,
                                 int threads) {
    std::vector<Target> targets(samples.size());
    const std::size_t chunk_count = (samples.size() + kTargetChunk - 1) / kTargetChunk;
    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = c * kTargetChunk;
        const std::size_t len = std::min(kTargetChunk, samples.size() - begin);
        targets_for_chunk(eval, samples.subspan(begin, len),
                          std::span(targets).subspan(begin, len));
    };
    if (threads <= 1 || chunk_count <= 1) {
        for (std::size_t c = 0; c < chunk_count; ++c) run_chunk(c);
        return targets;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunk_count || failed.load()) return;
            try {
                run_chunk(c);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                failed.store(true);
                if (error.empty()) error = e.what();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(threads, static_cast<int>(chunk_count));
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("target construction failed: " + error);
    return targets;
}

template <class Scalar>
IterationStats train_iteration(nn::NetworkParams<Scalar>& params,
                               const nn::NetworkConfig& net_cfg,
                               const AdiConfig& adi_cfg, long iteration_index) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(mix64(adi_cfg.seed, static_cast<std::uint64_t>(iteration_index)));

    const std::vector<TrainingSample> samples =
        generate_samples(adi_cfg.scramble_depth, adi_cfg.sequences_per_iteration, rng);

    // Targets are built against a frozen snapshot: all of them are computed
    // before the first parameter update below.
    const NetworkEvaluator<Scalar> eval(params);
    const std::vector<Target> targets =
        make_targets(eval, samples, adi_cfg.target_threads);

    IterationStats stats;
    stats.iteration = iteration_index;
    stats.samples_seen = static_cast<long>(samples.size());
    stats.mean_target_by_depth.assign(static_cast<std::size_t>(adi_cfg.scramble_depth), 0);
    stats.mean_abs_target_by_depth.assign(
        static_cast<std::size_t>(adi_cfg.scramble_depth), 0);
    std::vector<long> depth_counts(static_cast<std::size_t>(adi_cfg.scramble_depth), 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto d = static_cast<std::size_t>(samples[i].depth - 1);
        stats.mean_target_by_depth[d] += targets[i].value_target;
        stats.mean_abs_target_by_depth[d] += std::abs(targets[i].value_target);
        ++depth_counts[d];
    }
    for (std::size_t d = 0; d < depth_counts.size(); ++d) {
        if (depth_counts[d] == 0) continue;
        stats.mean_target_by_depth[d] /= static_cast<double>(depth_counts[d]);
        stats.mean_abs_target_by_depth[d] /= static_cast<double>(depth_counts[d]);
    }

    // seeded shuffle, then sequential minibatches
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(static_cast<std::uint32_t>(i))]);

    nn::Gradients<Scalar> grads;
    double loss_weight_total = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(adi_cfg.batch_size)) {
        const std::size_t len =
            std::min(static_cast<std::size_t>(adi_cfg.batch_size), order.size() - begin);
        nn::TrainingBatch<Scalar> batch;
        batch.inputs.reserve(len);
        batch.value_targets.resize(static_cast<Eigen::Index>(len));
        batch.policy_targets.reserve(len);
        batch.weights.resize(static_cast<Eigen::Index>(len));
        double weight_sum = 0;
        for (std::size_t j = 0; j < len; ++j) {
            const std::size_t idx = order[begin + j];
            batch.inputs.push_back(encode(samples[idx].state));
            batch.value_targets[static_cast<Eigen::Index>(j)] =
                static_cast<Scalar>(targets[idx].value_target);
            batch.policy_targets.push_back(targets[idx].policy_target);
            const double w = 1.0 / samples[idx].depth;
            batch.weights[static_cast<Eigen::Index>(j)] = static_cast<Scalar>(w);
            weight_sum += w;
        }
        nn::LossBreakdown loss;
        try {
            loss = nn::loss_and_gradients(params, batch, net_cfg, grads);
        } catch (const nn::NumericError& e) {
            throw std::runtime_error("iteration " + std::to_string(iteration_index) +
                                     " aborted: " + e.what());
        }
        nn::rmsprop_step(params, grads, net_cfg);
        stats.loss += loss.total * weight_sum;
        stats.value_loss += loss.value_mse * weight_sum;
        stats.policy_loss += loss.policy_ce * weight_sum;
        loss_weight_total += weight_sum;
    }
    stats.loss /= loss_weight_total;
    stats.value_loss /= loss_weight_total;
    stats.policy_loss /= loss_weight_total;

    stats.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    return stats;
}

template IterationStats train_iteration<double>(nn::NetworkParams<double>&,
                                                const nn::NetworkConfig&,
                                                const AdiConfig&, long);
template IterationStats train_iteration<float>(nn::NetworkParams<float>&,
                                               const nn::NetworkConfig&,
                                               const AdiConfig&, long);

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kAdiKeys = {
    "k", "l", "iterations", "batch_size", "checkpoint_interval",
    "seed", "target_threads", "scalar",
};

}  // namespace

TrainingConfig parse_training_config(const std::string& text) {
    const KeyValueConfig kv = KeyValueConfig::parse_string(text);
    std::set<std::string> known = kNetworkConfigKeys;
    known.insert(kAdiKeys.begin(), kAdiKeys.end());
    kv.require_known(known);

    TrainingConfig cfg;
    cfg.network = network_config_from_kv(kv);
    cfg.adi.scramble_depth = static_cast<int>(kv.get_int("k", cfg.adi.scramble_depth));
    cfg.adi.sequences_per_iteration =
        static_cast<int>(kv.get_int("l", cfg.adi.sequences_per_iteration));
    cfg.adi.iterations = kv.get_int("iterations", cfg.adi.iterations);
    cfg.adi.batch_size = static_cast<int>(kv.get_int("batch_size", cfg.adi.batch_size));
    cfg.adi.checkpoint_interval =
        kv.get_int("checkpoint_interval", cfg.adi.checkpoint_interval);
    cfg.adi.seed = kv.get_u64("seed", cfg.adi.seed);
    cfg.adi.target_threads =
        static_cast<int>(kv.get_int("target_threads", cfg.adi.target_threads));
    cfg.scalar = kv.get_string("scalar", cfg.scalar);
    if (cfg.scalar != "f64" && cfg.scalar != "f32")
        throw std::runtime_error("config: scalar must be f64 or f32");
    cfg.adi.validate();
    return cfg;
}

TrainingConfig load_training_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open training config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_training_config(buf.str());
}

std::string serialize_training_config(const TrainingConfig& cfg) {
    KeyValueConfig kv;
    network_config_to_kv(cfg.network, kv);
    kv.set_int("k", cfg.adi.scramble_depth);
    kv.set_int("l", cfg.adi.sequences_per_iteration);
    kv.set_int("iterations", cfg.adi.iterations);
    kv.set_int("batch_size", cfg.adi.batch_size);
    kv.set_int("checkpoint_interval", cfg.adi.checkpoint_interval);
    kv.set("seed", std::to_string(cfg.adi.seed));
    kv.set_int("target_threads", cfg.adi.target_threads);
    kv.set("scalar", cfg.scalar);
    return kv.serialize();
}

// ---------------------------------------------------------------------------
// Training run
// ---------------------------------------------------------------------------

namespace {

json stats_to_json(const IterationStats& s) {
    return json{{"iteration", s.iteration},
                {"samples", s.samples_seen},
                {"loss", s.loss},
                {"value_loss", s.value_loss},
                {"policy_loss", s.policy_loss},
                {"mean_target_by_depth", s.mean_target_by_depth},
                {"mean_abs_target_by_depth", s.mean_abs_target_by_depth},
                {"wall_ms", s.wall_ms}};
}

template <class Scalar>
RunSummary run_training_impl(const TrainingConfig& cfg, const std::string& out_dir,
                             const std::string& resume_checkpoint,
                             std::ostream* progress) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    nn::NetworkParams<Scalar> params;
    long start_iteration = 0;
    if (resume_checkpoint.empty()) {
        params = nn::init_params<Scalar>(cfg.network, cfg.adi.seed);
    } else {
        const Checkpoint ckpt = load_checkpoint_file(resume_checkpoint);
        if (!(ckpt.config == cfg.network))
            throw std::runtime_error(
                "resume checkpoint was trained with a different network config");
        if (const auto it = ckpt.metadata.find("iteration"); it != ckpt.metadata.end())
            start_iteration = std::stol(it->second);
        if constexpr (std::is_same_v<Scalar, double>)
            params = ckpt.params;
        else
            params = narrow_params(ckpt.params);
    }

    const std::string log_path = (fs::path(out_dir) / "training_log.jsonl").string();
    std::ofstream log(log_path, std::ios::app);
    if (!log) throw std::runtime_error("cannot open training log: " + log_path);

    auto save_snapshot = [&](long completed, const std::string& name) {
        Checkpoint ckpt;
        ckpt.config = cfg.network;
        if constexpr (std::is_same_v<Scalar, double>)
            ckpt.params = params;
        else
            ckpt.params = widen_params(params);
        ckpt.metadata["iteration"] = std::to_string(completed);
        ckpt.metadata["seed"] = std::to_string(cfg.adi.seed);
        ckpt.metadata["k"] = std::to_string(cfg.adi.scramble_depth);
        ckpt.metadata["scalar"] = cfg.scalar;
        const std::string path = (fs::path(out_dir) / name).string();
        try {
            save_checkpoint_file(ckpt, path);
        } catch (const std::exception& e) {
            throw std::runtime_error("checkpoint write failed at iteration " +
                                     std::to_string(completed) + ": " + e.what());
        }
        return path;
    };

    RunSummary summary;
    summary.start_iteration = start_iteration;
    summary.log_path = log_path;
    for (long it = start_iteration; it < cfg.adi.iterations; ++it) {
        const IterationStats stats = train_iteration(params, cfg.network, cfg.adi, it);
        summary.stats.push_back(stats);
        ++summary.iterations_completed;
        log << stats_to_json(stats).dump() << "\n";
        if (!log)
            throw std::runtime_error("training log write failed at iteration " +
                                     std::to_string(it));
        log.flush();
        if (progress && (it % 100 == 0 || it + 1 == cfg.adi.iterations))
            *progress << "iter " << it << " loss " << stats.loss << " (value "
                      << stats.value_loss << ", policy " << stats.policy_loss << ")"
                      << std::endl;
        if ((it + 1) % cfg.adi.checkpoint_interval == 0 &&
            it + 1 != cfg.adi.iterations)
            save_snapshot(it + 1, "checkpoint_" + std::to_string(it + 1) + ".bin");
    }
    summary.final_checkpoint = save_snapshot(cfg.adi.iterations, "checkpoint_final.bin");
    return summary;
}

}  // namespace

RunSummary run_training(const TrainingConfig& cfg, const std::string& out_dir,
                        const std::string& resume_checkpoint, std::ostream* progress) {
    cfg.adi.validate();
    cfg.network.validate();
    if (cfg.scalar == "f32")
        return run_training_impl<float>(cfg, out_dir, resume_checkpoint, progress);
    return run_training_impl<double>(cfg, out_dir, resume_checkpoint, progress);
}

}  // namespace autocube::adi
