#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "autocube/cube.hpp"
#include "autocube/evaluator.hpp"
#include "autocube/mcts.hpp"
#include "autocube/oracle.hpp"

namespace autocube::bench {

enum class SolverVariant { Mcts, NaiveMcts, Greedy, Oracle };

std::string variant_name(SolverVariant v);
SolverVariant parse_variant(const std::string& name);

struct BenchmarkSpec {
    SolverVariant variant = SolverVariant::Mcts;
    std::vector<std::vector<Move>> scrambles;
    mcts::SearchConfig search;
    int greedy_move_limit = 100;
    int oracle_depth_cap = 10;
    std::uint64_t seed = 0;          // provenance only; solvers are seed-free
    std::string checkpoint_path;     // provenance
    std::string scramble_source;     // provenance
};

struct CubeRecord {
    int index = 0;
    std::string scramble;
    bool solved = false;
    std::string solution;       // headline solution for the variant
    long solution_length = 0;
    std::string naive_path;     // mcts variants: pre-extraction trace
    long naive_length = 0;
    long nodes_expanded = 0;
    long simulations = 0;
    double wall_ms = 0;
};

struct Aggregates {
    int cubes = 0;
    int solved = 0;
    double solve_rate = 0;
    double median_length = 0;  // over solved cubes
    double iqr_length = 0;
    double median_wall_ms = 0; // over solved cubes
    double mean_nodes_expanded = 0;
};

struct BenchmarkRun {
    nlohmann::json config_snapshot;  // identical for every record of the run
    std::vector<CubeRecord> records;
    Aggregates aggregates;
};

// Runs the chosen solver over every scramble. mcts/naive-mcts/greedy need an
// evaluator; oracle needs a distance table. Missing prerequisites raise a
// startup error listing them before any cube is attempted.
BenchmarkRun run_benchmark(const BenchmarkSpec& spec, const Evaluator* eval,
                           const DistanceTable* table);

nlohmann::json run_to_json(const BenchmarkRun& run);
BenchmarkRun run_from_json(const nlohmann::json& j);
void write_run_json(const BenchmarkRun& run, const std::string& path);
BenchmarkRun load_run_json(const std::string& path);

// CSV mirror of the per-cube records, column for column.
void write_run_csv(const BenchmarkRun& run, const std::string& path);

// ---------------------------------------------------------------------------
// Conjugation-triplet analysis
// ---------------------------------------------------------------------------

// A length-3 window (a, b, c) is a conjugation iff c == inverse(a); b is
// unconstrained, so 144 of the 1728 possible triplets qualify.
bool is_conjugation_triplet(Move a, Move b, Move c);

struct TripletStats {
    struct Entry {
        std::array<Move, 3> triplet;
        long count = 0;
        bool conjugation = false;
    };

    // observed triplets, by descending count (ties: notation order)
    std::vector<Entry> entries;
    long solutions_analyzed = 0;
    long total_triplets = 0;

    struct ClassSummary {
        long total_count = 0;
        long distinct_observed = 0;
        // mean over *observed* triplets of count/total_triplets
        double mean_frequency_global = 0;
        // mean over observed triplets of count/solutions_analyzed
        double mean_count_per_solution = 0;
    };
    ClassSummary conjugation;
    ClassSummary other;
};

// Sliding length-3 window over every solution; sequences shorter than 3
// contribute nothing.
TripletStats triplet_analysis(std::span<const std::vector<Move>> solutions);

nlohmann::json triplet_stats_to_json(const TripletStats& stats);
void write_triplet_csv(const TripletStats& stats, const std::string& path);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

// Static report files over one or more runs:
//   aggregates.csv / aggregates.json   one row per run
//   lengths_histogram.csv              variant,length,count (solved cubes)
//   solve_rate_vs_time.csv             variant,time_ms,fraction_solved
//   paired_lengths.csv                 per-cube deltas (two+ runs on the
//                                      same scrambles)
// Runs of the same variant with different config snapshots are refused.
void write_report(std::span<const BenchmarkRun> runs, const std::string& out_dir);

}  // namespace autocube::bench
