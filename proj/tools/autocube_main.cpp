// autocube command line: train the network, solve scrambles, build oracle
// tables, run benchmark campaigns and analysis, emit reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "autocube/adi.hpp"
#include "autocube/bench.hpp"
#include "autocube/checkpoint.hpp"
#include "autocube/config.hpp"
#include "autocube/cube.hpp"
#include "autocube/mcts.hpp"
#include "autocube/oracle.hpp"

namespace {

using namespace autocube;
namespace fs = std::filesystem;

std::chrono::milliseconds parse_duration(const std::string& text) {
    if (text.empty()) throw std::runtime_error("empty duration");
    std::size_t pos = 0;
    const double value = std::stod(text, &pos);
    const std::string unit = text.substr(pos);
    double ms = 0;
    if (unit == "ms") ms = value;
    else if (unit == "s" || unit.empty()) ms = value * 1000;
    else if (unit == "m") ms = value * 60'000;
    else if (unit == "h") ms = value * 3'600'000;
    else throw std::runtime_error("bad duration unit '" + unit + "' (use ms/s/m/h)");
    return std::chrono::milliseconds(static_cast<long long>(ms));
}

void require_files(std::initializer_list<std::pair<std::string, std::string>> files) {
    std::string missing;
    for (const auto& [what, path] : files) {
        if (path.empty() || !fs::exists(path)) {
            if (!missing.empty()) missing += ", ";
            missing += what + " (" + (path.empty() ? "not given" : path) + ")";
        }
    }
    if (!missing.empty()) throw std::runtime_error("missing input files: " + missing);
}

void print_aggregates(const bench::BenchmarkRun& run) {
    const auto& a = run.aggregates;
    std::cout << "cubes " << a.cubes << "  solved " << a.solved << " ("
              << a.solve_rate * 100 << "%)  median length " << a.median_length
              << "  IQR " << a.iqr_length << "  median time " << a.median_wall_ms
              << " ms  mean nodes " << a.mean_nodes_expanded << "\n";
}

std::vector<std::vector<Move>> generate_scrambles(int depth, int count,
                                                  std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<Move>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(scramble(depth, rng).second.moves);
    return out;
}

struct SearchFlags {
    std::string time_limit = "60s";
    int workers = 1;
    double c = 4.0;
    double nu = 1.0;
    long max_sims = 1'000'000;
    bool shortcut = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--time-limit", time_limit,
                        "wall-clock budget per cube (e.g. 500ms, 60s, 10m)");
        cmd->add_option("--workers", workers, "search worker threads per cube");
        cmd->add_option("--c", c, "exploration constant");
        cmd->add_option("--nu", nu, "virtual loss");
        cmd->add_option("--max-sims", max_sims,
                        "simulation cap per cube (0 = unlimited)");
        cmd->add_flag("--goal-shortcut", shortcut,
                      "finish as soon as an expansion materializes the goal");
    }

    mcts::SearchConfig to_config() const {
        mcts::SearchConfig cfg;
        cfg.time_limit = parse_duration(time_limit);
        cfg.worker_count = workers;
        cfg.exploration_c = c;
        cfg.virtual_loss_nu = nu;
        cfg.max_simulations = max_sims;
        cfg.solved_child_shortcut = shortcut;
        return cfg;
    }
};

void write_results(const bench::BenchmarkRun& run, const std::string& path) {
    if (path.ends_with(".csv"))
        bench::write_run_csv(run, path);
    else
        bench::write_run_json(run, path);
    std::cout << "results written to " << path << "\n";
}

std::vector<std::vector<Move>> load_solutions_arg(const std::string& path) {
    if (path.ends_with(".json")) {
        const bench::BenchmarkRun run = bench::load_run_json(path);
        std::vector<std::vector<Move>> out;
        for (const auto& rec : run.records)
            if (rec.solved) out.push_back(parse_moves(rec.solution));
        return out;
    }
    return load_scramble_file(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-taught Rubik's cube solver and analysis toolkit"};
    app.require_subcommand(1);
    std::uint64_t global_seed = 1;
    std::string global_out_dir = ".";
    app.add_option("--seed", global_seed, "default RNG seed for subcommands");
    app.add_option("--out-dir", global_out_dir, "default output directory");

    // --- train ---
    auto* train = app.add_subcommand("train", "run the self-play training loop");
    std::string train_config, train_out, train_resume;
    train->add_option("--config", train_config, "training config file")->required();
    train->add_option("--out", train_out, "checkpoint/log directory");
    train->add_option("--resume", train_resume, "checkpoint to continue from");

    // --- solve ---
    auto* solve_cmd = app.add_subcommand("solve", "solve scrambles with tree search");
    std::string solve_ckpt, solve_scrambles, solve_out = "results.json";
    SearchFlags solve_flags;
    solve_cmd->add_option("--checkpoint", solve_ckpt, "trained network checkpoint")
        ->required();
    solve_cmd->add_option("--scrambles", solve_scrambles, "scramble file")->required();
    solve_cmd->add_option("--out", solve_out, "results file (.json or .csv)");
    solve_flags.attach(solve_cmd);

    // --- oracle ---
    auto* oracle_cmd = app.add_subcommand("oracle", "exact distance machinery");
    auto* oracle_build = oracle_cmd->add_subcommand("build", "exhaustive BFS table");
    int oracle_depth = 5;
    std::string oracle_out;
    oracle_build->add_option("--depth", oracle_depth, "table radius (<= 7)")
        ->required();
    oracle_build->add_option("--out", oracle_out, "table file")->required();

    // --- scramble ---
    auto* scramble_cmd =
        app.add_subcommand("scramble", "generate a reproducible scramble file");
    int scr_depth = 5, scr_count = 100;
    std::uint64_t scr_seed = 0;
    std::string scr_out;
    scramble_cmd->add_option("--depth", scr_depth, "moves per scramble")->required();
    scramble_cmd->add_option("--count", scr_count, "number of scrambles")->required();
    scramble_cmd->add_option("--seed", scr_seed, "RNG seed (default: global --seed)");
    scramble_cmd->add_option("--out", scr_out, "output file")->required();

    // --- bench ---
    auto* bench_cmd = app.add_subcommand("bench", "benchmark a solver variant");
    std::string bench_variant = "mcts", bench_preset, bench_scrambles, bench_ckpt,
                bench_table, bench_out = "bench_results.json", bench_csv;
    int bench_depth = 0, bench_count = 0, bench_greedy_limit = 100,
        bench_oracle_cap = 10;
    std::uint64_t bench_seed = 0;
    SearchFlags bench_flags;
    bench_cmd->add_option("--preset", bench_preset,
                          "campaign preset file (flags override it)");
    bench_cmd->add_option("--variant", bench_variant,
                          "mcts | naive-mcts | greedy | oracle");
    bench_cmd->add_option("--scrambles", bench_scrambles, "scramble file");
    bench_cmd->add_option("--depth", bench_depth, "generate scrambles of this depth");
    bench_cmd->add_option("--count", bench_count, "number of generated scrambles");
    bench_cmd->add_option("--seed", bench_seed, "seed for generated scrambles");
    bench_cmd->add_option("--checkpoint", bench_ckpt, "network checkpoint");
    bench_cmd->add_option("--table", bench_table, "distance table (oracle variant)");
    bench_cmd->add_option("--greedy-move-limit", bench_greedy_limit,
                          "step budget for the greedy variant");
    bench_cmd->add_option("--oracle-cap", bench_oracle_cap,
                          "depth cap for the oracle variant");
    bench_cmd->add_option("--out", bench_out, "results file (.json or .csv)");
    bench_cmd->add_option("--csv", bench_csv, "also write a CSV mirror");
    bench_flags.attach(bench_cmd);

    // --- analyze ---
    auto* analyze_cmd =
        app.add_subcommand("analyze", "conjugation-triplet analysis of solutions");
    std::string analyze_in, analyze_out = "triplets.json", analyze_csv;
    analyze_cmd
        ->add_option("--solutions", analyze_in,
                     "solutions file: move sequences per line, or results .json")
        ->required();
    analyze_cmd->add_option("--out", analyze_out, "stats JSON");
    analyze_cmd->add_option("--csv", analyze_csv, "per-triplet CSV");

    // --- report ---
    auto* report_cmd = app.add_subcommand("report", "aggregate one or more runs");
    std::vector<std::string> report_runs;
    std::string report_dir;
    report_cmd->add_option("--run", report_runs, "results .json files")->required();
    report_cmd->add_option("--out-dir", report_dir, "report directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            require_files({{"training config", train_config}});
            if (train_out.empty()) train_out = global_out_dir;
            if (!train_resume.empty()) require_files({{"resume checkpoint", train_resume}});
            const auto cfg = adi::load_training_config(train_config);
            const auto summary =
                adi::run_training(cfg, train_out, train_resume, &std::cout);
            std::cout << "completed " << summary.iterations_completed
                      << " iterations; final checkpoint: " << summary.final_checkpoint
                      << "\n";
        } else if (*solve_cmd) {
            require_files({{"checkpoint", solve_ckpt}, {"scrambles", solve_scrambles}});
            const Checkpoint ckpt = load_checkpoint_file(solve_ckpt);
            const NetworkEvaluator<double> eval(ckpt.params);
            bench::BenchmarkSpec spec;
            spec.variant = bench::SolverVariant::Mcts;
            spec.scrambles = load_scramble_file(solve_scrambles);
            spec.search = solve_flags.to_config();
            spec.checkpoint_path = solve_ckpt;
            spec.scramble_source = solve_scrambles;
            const auto run = bench::run_benchmark(spec, &eval, nullptr);
            print_aggregates(run);
            write_results(run, solve_out);
        } else if (*oracle_build) {
            const DistanceTable table = DistanceTable::build(oracle_depth);
            table.save(oracle_out);
            std::cout << "distance table depth " << table.max_depth() << ", "
                      << table.size() << " states:";
            for (std::size_t d = 0; d < table.counts().size(); ++d)
                std::cout << " d" << d << "=" << table.counts()[d];
            std::cout << "\nwritten to " << oracle_out << "\n";
        } else if (*scramble_cmd) {
            if (scr_seed == 0) scr_seed = global_seed;
            const auto scrambles = generate_scrambles(scr_depth, scr_count, scr_seed);
            write_scramble_file(scr_out, scrambles,
                                "depth=" + std::to_string(scr_depth) +
                                    " count=" + std::to_string(scr_count) +
                                    " seed=" + std::to_string(scr_seed));
            std::cout << scrambles.size() << " scrambles written to " << scr_out << "\n";
        } else if (*bench_cmd) {
            if (!bench_preset.empty()) {
                const KeyValueConfig preset = KeyValueConfig::parse_file(bench_preset);
                preset.require_known({"variant", "scramble_depth", "cube_count",
                                      "seed", "time_limit", "workers", "c", "nu",
                                      "max_simulations", "greedy_move_limit",
                                      "oracle_depth_cap"});
                if (bench_cmd->count("--variant") == 0)
                    bench_variant = preset.get_string("variant", bench_variant);
                if (bench_cmd->count("--depth") == 0)
                    bench_depth = static_cast<int>(preset.get_int("scramble_depth", bench_depth));
                if (bench_cmd->count("--count") == 0)
                    bench_count = static_cast<int>(preset.get_int("cube_count", bench_count));
                if (bench_cmd->count("--seed") == 0)
                    bench_seed = preset.get_u64("seed", bench_seed);
                if (bench_cmd->count("--time-limit") == 0)
                    bench_flags.time_limit =
                        preset.get_string("time_limit", bench_flags.time_limit);
                if (bench_cmd->count("--workers") == 0)
                    bench_flags.workers =
                        static_cast<int>(preset.get_int("workers", bench_flags.workers));
                if (bench_cmd->count("--c") == 0)
                    bench_flags.c = preset.get_double("c", bench_flags.c);
                if (bench_cmd->count("--nu") == 0)
                    bench_flags.nu = preset.get_double("nu", bench_flags.nu);
                if (bench_cmd->count("--max-sims") == 0)
                    bench_flags.max_sims =
                        preset.get_int("max_simulations", bench_flags.max_sims);
                if (bench_cmd->count("--greedy-move-limit") == 0)
                    bench_greedy_limit = static_cast<int>(
                        preset.get_int("greedy_move_limit", bench_greedy_limit));
                if (bench_cmd->count("--oracle-cap") == 0)
                    bench_oracle_cap = static_cast<int>(
                        preset.get_int("oracle_depth_cap", bench_oracle_cap));
            }
            if (bench_seed == 0) bench_seed = global_seed;

            bench::BenchmarkSpec spec;
            spec.variant = bench::parse_variant(bench_variant);
            spec.seed = bench_seed;
            if (!bench_scrambles.empty()) {
                require_files({{"scrambles", bench_scrambles}});
                spec.scrambles = load_scramble_file(bench_scrambles);
                spec.scramble_source = bench_scrambles;
            } else if (bench_depth > 0 && bench_count > 0) {
                spec.scrambles = generate_scrambles(bench_depth, bench_count, bench_seed);
                spec.scramble_source = "generated depth=" + std::to_string(bench_depth) +
                                       " count=" + std::to_string(bench_count) +
                                       " seed=" + std::to_string(bench_seed);
            } else {
                throw std::runtime_error(
                    "bench needs --scrambles FILE or --depth/--count to generate them");
            }
            spec.search = bench_flags.to_config();
            spec.greedy_move_limit = bench_greedy_limit;
            spec.oracle_depth_cap = bench_oracle_cap;
            spec.checkpoint_path = bench_ckpt;

            std::optional<Checkpoint> ckpt;
            std::optional<NetworkEvaluator<double>> eval;
            std::optional<DistanceTable> table;
            if (spec.variant == bench::SolverVariant::Oracle) {
                require_files({{"distance table", bench_table}});
                table = DistanceTable::load(bench_table);
            } else {
                require_files({{"checkpoint", bench_ckpt}});
                ckpt = load_checkpoint_file(bench_ckpt);
                eval.emplace(ckpt->params);
            }
            const auto run = bench::run_benchmark(
                spec, eval ? &*eval : nullptr, table ? &*table : nullptr);
            print_aggregates(run);
            write_results(run, bench_out);
            if (!bench_csv.empty()) bench::write_run_csv(run, bench_csv);
        } else if (*analyze_cmd) {
            require_files({{"solutions", analyze_in}});
            const auto solutions = load_solutions_arg(analyze_in);
            const auto stats = bench::triplet_analysis(solutions);
            std::ofstream out(analyze_out);
            if (!out) throw std::runtime_error("cannot write " + analyze_out);
            out << bench::triplet_stats_to_json(stats).dump(2) << "\n";
            if (!analyze_csv.empty()) bench::write_triplet_csv(stats, analyze_csv);
            std::cout << "solutions " << stats.solutions_analyzed << ", triplets "
                      << stats.total_triplets
                      << "; conjugation mean freq " << stats.conjugation.mean_frequency_global
                      << " vs other " << stats.other.mean_frequency_global << "\n"
                      << "stats written to " << analyze_out << "\n";
        } else if (*report_cmd) {
            if (report_dir.empty()) report_dir = global_out_dir;
            std::vector<bench::BenchmarkRun> runs;
            for (const std::string& path : report_runs) {
                require_files({{"run file", path}});
                runs.push_back(bench::load_run_json(path));
            }
            bench::write_report(runs, report_dir);
            std::cout << "report written to " << report_dir << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
