#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "autocube/cube.hpp"

namespace autocube {

// Exact quarter-turn distances for every state within max_depth of solved,
// built by exhaustive BFS. Ground truth for tests and the optimal solver's
// admissible heuristic.
class DistanceTable {
public:
    // Exhaustive BFS over the 12 generators. max_depth is capped at
    // kMaxSupportedDepth (about 9.2e6 states); beyond that the builder
    // refuses with a memory estimate rather than thrash.
    static DistanceTable build(int max_depth);

    static constexpr int kMaxSupportedDepth = 7;

    int max_depth() const { return max_depth_; }

    // counts[d] = number of states at exact distance d.
    const std::vector<std::uint64_t>& counts() const { return counts_; }

    std::uint64_t size() const { return dist_.size(); }

    // Exact distance, or nullopt when the state is farther than max_depth.
    std::optional<int> distance(const CubeState& s) const {
        const auto it = dist_.find(pack(s));
        if (it == dist_.end()) return std::nullopt;
        return static_cast<int>(it->second);
    }

    // Admissible lower bound for any state: exact within the table,
    // max_depth + 1 outside it.
    int lower_bound(const CubeState& s) const {
        const auto d = distance(s);
        return d ? *d : max_depth_ + 1;
    }

    void save(const std::string& path) const;
    static DistanceTable load(const std::string& path);

private:
    DistanceTable() = default;

    int max_depth_ = 0;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<PackedState, std::uint8_t, PackedStateHash> dist_;
};

struct OptimalResult {
    bool within_cap = false;
    std::vector<Move> solution;  // provably shortest when within_cap
    std::uint64_t nodes_visited = 0;
};

// Iterative-deepening A* with the distance table as heuristic. Returns a
// shortest solution or reports that the cap was exceeded. depth_cap is
// limited to kMaxOptimalDepth; beyond that single-machine IDA* with a
// shallow table stops being practical.
inline constexpr int kMaxOptimalDepth = 12;
OptimalResult optimal_solve(const CubeState& start, int depth_cap,
                            const DistanceTable& table);

}  // namespace autocube
