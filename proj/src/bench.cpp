#include "autocube/bench.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

namespace autocube::bench {

namespace {

using nlohmann::json;

double percentile(std::vector<double> values, double p) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    const double rank = p * (static_cast<double>(values.size()) - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] * (1 - frac) + values[hi] * frac;
}

Aggregates compute_aggregates(const std::vector<CubeRecord>& records) {
    Aggregates agg;
    agg.cubes = static_cast<int>(records.size());
    std::vector<double> lengths, times;
    double nodes = 0;
    for (const CubeRecord& r : records) {
        nodes += static_cast<double>(r.nodes_expanded);
        if (r.solved) {
            ++agg.solved;
            lengths.push_back(static_cast<double>(r.solution_length));
            times.push_back(r.wall_ms);
        }
    }
    agg.solve_rate = agg.cubes ? static_cast<double>(agg.solved) / agg.cubes : 0;
    agg.median_length = percentile(lengths, 0.5);
    agg.iqr_length = percentile(lengths, 0.75) - percentile(lengths, 0.25);
    agg.median_wall_ms = percentile(times, 0.5);
    agg.mean_nodes_expanded = agg.cubes ? nodes / agg.cubes : 0;
    return agg;
}

json snapshot_for(const BenchmarkSpec& spec) {
    return json{
        {"variant", variant_name(spec.variant)},
        {"exploration_c", spec.search.exploration_c},
        {"virtual_loss_nu", spec.search.virtual_loss_nu},
        {"time_limit_ms", spec.search.time_limit.count()},
        {"max_simulations", spec.search.max_simulations},
        {"worker_count", spec.search.worker_count},
        {"solved_child_shortcut", spec.search.solved_child_shortcut},
        {"greedy_move_limit", spec.greedy_move_limit},
        {"oracle_depth_cap", spec.oracle_depth_cap},
        {"seed", spec.seed},
        {"checkpoint", spec.checkpoint_path},
        {"scramble_source", spec.scramble_source},
        {"cubes", spec.scrambles.size()},
    };
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string variant_name(SolverVariant v) {
    switch (v) {
        case SolverVariant::Mcts: return "mcts";
        case SolverVariant::NaiveMcts: return "naive-mcts";
        case SolverVariant::Greedy: return "greedy";
        case SolverVariant::Oracle: return "oracle";
    }
    return "?";
}

SolverVariant parse_variant(const std::string& name) {
    if (name == "mcts") return SolverVariant::Mcts;
    if (name == "naive-mcts") return SolverVariant::NaiveMcts;
    if (name == "greedy") return SolverVariant::Greedy;
    if (name == "oracle") return SolverVariant::Oracle;
    throw std::invalid_argument(
        "unknown solver variant '" + name +
        "' (expected mcts, naive-mcts, greedy or oracle)");
}

BenchmarkRun run_benchmark(const BenchmarkSpec& spec, const Evaluator* eval,
                           const DistanceTable* table) {
    std::string missing;
    const bool needs_eval = spec.variant != SolverVariant::Oracle;
    if (needs_eval && eval == nullptr) missing += "network evaluator/checkpoint";
    if (spec.variant == SolverVariant::Oracle && table == nullptr) {
        if (!missing.empty()) missing += ", ";
        missing += "distance table";
    }
    if (!missing.empty())
        throw std::runtime_error("benchmark cannot start, missing: " + missing);
    if (spec.variant == SolverVariant::Mcts || spec.variant == SolverVariant::NaiveMcts)
        spec.search.validate();

    BenchmarkRun run;
    run.config_snapshot = snapshot_for(spec);
    run.records.reserve(spec.scrambles.size());

    for (std::size_t i = 0; i < spec.scrambles.size(); ++i) {
        const CubeState start = apply_moves(solved_state(), spec.scrambles[i]);
        CubeRecord rec;
        rec.index = static_cast<int>(i);
        rec.scramble = format_moves(spec.scrambles[i]);
        switch (spec.variant) {
            case SolverVariant::Mcts:
            case SolverVariant::NaiveMcts: {
                const mcts::SolveResult r = mcts::solve(start, *eval, spec.search);
                rec.solved = r.solved;
                const auto& headline = spec.variant == SolverVariant::Mcts
                                           ? r.solution
                                           : r.naive_path;
                rec.solution = format_moves(headline);
                rec.solution_length = static_cast<long>(headline.size());
                rec.naive_path = format_moves(r.naive_path);
                rec.naive_length = static_cast<long>(r.naive_path.size());
                rec.nodes_expanded = r.nodes_expanded;
                rec.simulations = r.simulations;
                rec.wall_ms = static_cast<double>(r.wall_time.count());
                break;
            }
            case SolverVariant::Greedy: {
                const mcts::SolveResult r =
                    mcts::greedy_solve(start, *eval, spec.greedy_move_limit);
                rec.solved = r.solved;
                rec.solution = format_moves(r.solution);
                rec.solution_length = static_cast<long>(r.solution.size());
                rec.naive_path = rec.solution;
                rec.naive_length = rec.solution_length;
                rec.nodes_expanded = r.nodes_expanded;
                rec.wall_ms = static_cast<double>(r.wall_time.count());
                break;
            }
            case SolverVariant::Oracle: {
                const auto t0 = std::chrono::steady_clock::now();
                const OptimalResult r =
                    optimal_solve(start, spec.oracle_depth_cap, *table);
                rec.solved = r.within_cap;
                rec.solution = format_moves(r.solution);
                rec.solution_length = static_cast<long>(r.solution.size());
                rec.naive_path = rec.solution;
                rec.naive_length = rec.solution_length;
                rec.nodes_expanded = static_cast<long>(r.nodes_visited);
                rec.wall_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
                break;
            }
        }
        run.records.push_back(std::move(rec));
    }
    run.aggregates = compute_aggregates(run.records);
    return run;
}

namespace {

json record_to_json(const CubeRecord& r) {
    return json{
        {"index", r.index},
        {"scramble", r.scramble},
        {"solved", r.solved},
        {"solution", r.solution},
        {"solution_length", r.solution_length},
        {"naive_path", r.naive_path},
        {"naive_length", r.naive_length},
        {"nodes_expanded", r.nodes_expanded},
        {"simulations", r.simulations},
        {"wall_ms", r.wall_ms},
    };
}

CubeRecord record_from_json(const json& j) {
    CubeRecord r;
    r.index = j.at("index").get<int>();
    r.scramble = j.at("scramble").get<std::string>();
    r.solved = j.at("solved").get<bool>();
    r.solution = j.at("solution").get<std::string>();
    r.solution_length = j.at("solution_length").get<long>();
    r.naive_path = j.at("naive_path").get<std::string>();
    r.naive_length = j.at("naive_length").get<long>();
    r.nodes_expanded = j.at("nodes_expanded").get<long>();
    r.simulations = j.at("simulations").get<long>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
}

json aggregates_to_json(const Aggregates& a) {
    return json{
        {"cubes", a.cubes},
        {"solved", a.solved},
        {"solve_rate", a.solve_rate},
        {"median_length", a.median_length},
        {"iqr_length", a.iqr_length},
        {"median_wall_ms", a.median_wall_ms},
        {"mean_nodes_expanded", a.mean_nodes_expanded},
    };
}

}  // namespace

json run_to_json(const BenchmarkRun& run) {
    json records = json::array();
    for (const CubeRecord& r : run.records) records.push_back(record_to_json(r));
    return json{{"config", run.config_snapshot},
                {"aggregates", aggregates_to_json(run.aggregates)},
                {"records", std::move(records)}};
}

BenchmarkRun run_from_json(const json& j) {
    BenchmarkRun run;
    run.config_snapshot = j.at("config");
    for (const json& rec : j.at("records"))
        run.records.push_back(record_from_json(rec));
    run.aggregates = compute_aggregates(run.records);
    return run;
}

void write_run_json(const BenchmarkRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write results: " + path);
    out << run_to_json(run).dump(2) << "\n";
}

BenchmarkRun load_run_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results: " + path);
    json j;
    in >> j;
    return run_from_json(j);
}

void write_run_csv(const BenchmarkRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write results: " + path);
    out << "index,scramble,solved,solution,solution_length,naive_path,"
           "naive_length,nodes_expanded,simulations,wall_ms\n";
    for (const CubeRecord& r : run.records) {
        out << r.index << ',' << csv_quote(r.scramble) << ',' << (r.solved ? 1 : 0)
            << ',' << csv_quote(r.solution) << ',' << r.solution_length << ','
            << csv_quote(r.naive_path) << ',' << r.naive_length << ','
            << r.nodes_expanded << ',' << r.simulations << ',' << r.wall_ms << "\n";
    }
}

// ---------------------------------------------------------------------------
// Triplets
// ---------------------------------------------------------------------------

bool is_conjugation_triplet(Move a, Move /*b*/, Move c) { return c == inverse(a); }

TripletStats triplet_analysis(std::span<const std::vector<Move>> solutions) {
    TripletStats stats;
    stats.solutions_analyzed = static_cast<long>(solutions.size());

    std::map<int, long> counts;  // key = ((a*12)+b)*12+c, notation order
    for (const auto& seq : solutions) {
        if (seq.size() < 3) continue;
        for (std::size_t i = 0; i + 2 < seq.size(); ++i) {
            const int key = (move_index(seq[i]) * kNumMoves + move_index(seq[i + 1])) *
                                kNumMoves +
                            move_index(seq[i + 2]);
            ++counts[key];
            ++stats.total_triplets;
        }
    }

    for (const auto& [key, count] : counts) {
        TripletStats::Entry e;
        e.triplet = {move_from_index(key / (kNumMoves * kNumMoves)),
                     move_from_index((key / kNumMoves) % kNumMoves),
                     move_from_index(key % kNumMoves)};
        e.count = count;
        e.conjugation = is_conjugation_triplet(e.triplet[0], e.triplet[1], e.triplet[2]);
        stats.entries.push_back(e);
    }
    std::stable_sort(stats.entries.begin(), stats.entries.end(),
                     [](const auto& a, const auto& b) { return a.count > b.count; });

    auto summarize = [&](bool conjugation) {
        TripletStats::ClassSummary s;
        for (const auto& e : stats.entries) {
            if (e.conjugation != conjugation) continue;
            s.total_count += e.count;
            ++s.distinct_observed;
        }
        if (s.distinct_observed > 0 && stats.total_triplets > 0) {
            s.mean_frequency_global =
                static_cast<double>(s.total_count) /
                static_cast<double>(stats.total_triplets) / s.distinct_observed;
            s.mean_count_per_solution =
                static_cast<double>(s.total_count) /
                static_cast<double>(stats.solutions_analyzed) / s.distinct_observed;
        }
        return s;
    };
    stats.conjugation = summarize(true);
    stats.other = summarize(false);
    return stats;
}

json triplet_stats_to_json(const TripletStats& stats) {
    auto class_json = [](const TripletStats::ClassSummary& s) {
        return json{{"total_count", s.total_count},
                    {"distinct_observed", s.distinct_observed},
                    {"mean_frequency_global", s.mean_frequency_global},
                    {"mean_count_per_solution", s.mean_count_per_solution}};
    };
    json entries = json::array();
    for (const auto& e : stats.entries) {
        entries.push_back(json{
            {"triplet", format_moves(e.triplet)},
            {"count", e.count},
            {"conjugation", e.conjugation},
        });
    }
    return json{{"solutions_analyzed", stats.solutions_analyzed},
                {"total_triplets", stats.total_triplets},
                {"conjugation", class_json(stats.conjugation)},
                {"other", class_json(stats.other)},
                {"entries", std::move(entries)}};
}

void write_triplet_csv(const TripletStats& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write triplet stats: " + path);
    out << "triplet,count,conjugation\n";
    for (const auto& e : stats.entries)
        out << csv_quote(format_moves(e.triplet)) << ',' << e.count << ','
            << (e.conjugation ? 1 : 0) << "\n";
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

void write_report(std::span<const BenchmarkRun> runs, const std::string& out_dir) {
    if (runs.empty()) throw std::invalid_argument("report: no runs given");
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    // group by variant; conflicting snapshots within a variant are refused
    std::map<std::string, std::vector<const BenchmarkRun*>> by_variant;
    for (const BenchmarkRun& run : runs) {
        const std::string variant = run.config_snapshot.value("variant", "?");
        auto& group = by_variant[variant];
        if (!group.empty() &&
            group.front()->config_snapshot != run.config_snapshot)
            throw std::runtime_error(
                "report: refusing to merge runs of variant '" + variant +
                "' with conflicting config snapshots");
        group.push_back(&run);
    }

    struct Series {
        std::string variant;
        std::vector<CubeRecord> records;
        Aggregates aggregates;
    };
    std::vector<Series> series;
    for (const auto& [variant, group] : by_variant) {
        Series s;
        s.variant = variant;
        for (const BenchmarkRun* run : group)
            s.records.insert(s.records.end(), run->records.begin(),
                             run->records.end());
        s.aggregates = compute_aggregates(s.records);
        series.push_back(std::move(s));
    }

    {
        std::ofstream out(fs::path(out_dir) / "aggregates.csv");
        out << "variant,cubes,solved,solve_rate,median_length,iqr_length,"
               "median_wall_ms,mean_nodes_expanded\n";
        json all = json::array();
        for (const Series& s : series) {
            out << s.variant << ',' << s.aggregates.cubes << ',' << s.aggregates.solved
                << ',' << s.aggregates.solve_rate << ',' << s.aggregates.median_length
                << ',' << s.aggregates.iqr_length << ',' << s.aggregates.median_wall_ms
                << ',' << s.aggregates.mean_nodes_expanded << "\n";
            json j = aggregates_to_json(s.aggregates);
            j["variant"] = s.variant;
            all.push_back(std::move(j));
        }
        std::ofstream jout(fs::path(out_dir) / "aggregates.json");
        jout << all.dump(2) << "\n";
    }

    {
        std::ofstream out(fs::path(out_dir) / "lengths_histogram.csv");
        out << "variant,length,count\n";
        for (const Series& s : series) {
            std::map<long, long> histogram;
            for (const CubeRecord& r : s.records)
                if (r.solved) ++histogram[r.solution_length];
            for (const auto& [length, count] : histogram)
                out << s.variant << ',' << length << ',' << count << "\n";
        }
    }

    {
        std::ofstream out(fs::path(out_dir) / "solve_rate_vs_time.csv");
        out << "variant,time_ms,fraction_solved\n";
        for (const Series& s : series) {
            std::vector<double> times;
            for (const CubeRecord& r : s.records)
                if (r.solved) times.push_back(r.wall_ms);
            std::sort(times.begin(), times.end());
            const double total = static_cast<double>(s.records.size());
            for (std::size_t i = 0; i < times.size(); ++i) {
                // emit the cumulative fraction at each distinct time
                if (i + 1 < times.size() && times[i + 1] == times[i]) continue;
                out << s.variant << ',' << times[i] << ','
                    << (total > 0 ? static_cast<double>(i + 1) / total : 0) << "\n";
            }
        }
    }

    // paired per-cube table when all series cover the same scrambles
    if (series.size() >= 2) {
        bool comparable = true;
        for (const Series& s : series) {
            if (s.records.size() != series.front().records.size()) comparable = false;
        }
        if (comparable) {
            for (std::size_t i = 0; comparable && i < series.front().records.size(); ++i)
                for (const Series& s : series)
                    if (s.records[i].scramble != series.front().records[i].scramble)
                        comparable = false;
        }
        if (comparable) {
            std::ofstream out(fs::path(out_dir) / "paired_lengths.csv");
            out << "index,scramble";
            for (const Series& s : series) out << ',' << s.variant << "_length";
            for (std::size_t k = 1; k < series.size(); ++k)
                out << ",delta_" << series[k].variant << "_vs_" << series[0].variant;
            out << "\n";
            for (std::size_t i = 0; i < series.front().records.size(); ++i) {
                out << series.front().records[i].index << ','
                    << csv_quote(series.front().records[i].scramble);
                for (const Series& s : series) {
                    if (s.records[i].solved)
                        out << ',' << s.records[i].solution_length;
                    else
                        out << ',';
                }
                for (std::size_t k = 1; k < series.size(); ++k) {
                    if (series[k].records[i].solved && series[0].records[i].solved)
                        out << ','
                            << series[k].records[i].solution_length -
                                   series[0].records[i].solution_length;
                    else
                        out << ',';
                }
                out << "\n";
            }
        }
    }
}

}  // namespace autocube::bench
