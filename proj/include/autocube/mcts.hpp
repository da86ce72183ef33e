#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "autocube/cube.hpp"
#include "autocube/evaluator.hpp"

namespace autocube::mcts {

struct SearchConfig {
    double exploration_c = 4.0;    // c in U_s(a)
    double virtual_loss_nu = 1.0;  // nu added along the selection path
    std::chrono::milliseconds time_limit{60000};  // <=0 means unlimited
    long max_simulations = 1'000'000;             // <=0 means unlimited
    int worker_count = 1;
    // Optional expansion-time goal check (off by default: a simulation
    // normally terminates only when the selected leaf itself is solved).
    bool solved_child_shortcut = false;

    void validate() const;
};

// Per-state memory: for each of the 12 actions the visit count N, the
// maximal backed-up value W, the outstanding virtual loss L and the prior P
// (the softmax policy of this state's own network evaluation). N/W/L are
// updated with atomic read-modify-write; children are materialized exactly
// once by whichever worker wins the expansion race.
struct SearchNode {
    CubeState state;
    SearchNode* parent = nullptr;
    std::uint8_t move_from_parent = 0;
    float cached_value = 0;  // network value of this state, fixed at creation

    std::array<float, kNumMoves> prior{};
    std::array<std::atomic<int>, kNumMoves> visit_count;
    std::array<std::atomic<float>, kNumMoves> max_value;
    std::array<std::atomic<float>, kNumMoves> virtual_loss;

    // 0 = unexpanded, 1 = being expanded, 2 = expanded
    std::atomic<int> expand_state{0};
    SearchNode* children = nullptr;  // contiguous block of 12 once expanded

    bool expanded() const {
        return expand_state.load(std::memory_order_acquire) == 2;
    }
    int visit_total() const {
        int n = 0;
        for (const auto& v : visit_count) n += v.load(std::memory_order_relaxed);
        return n;
    }
};

// Search tree with stable node storage. The root is expanded on
// construction, so every simulation selects at least one action and
// sum_a N_root(a) equals the number of completed simulations.
class SearchTree {
public:
    SearchTree(const CubeState& root_state, const Evaluator& eval);

    SearchNode* root() { return root_.get(); }
    const SearchNode* root() const { return root_.get(); }

    long expansions() const { return expansions_.load(); }
    long completed_simulations() const { return completed_.load(); }

    // All allocated nodes in deterministic preorder (root first, children in
    // action order). Used by path extraction, invariant checks and tests.
    std::vector<const SearchNode*> all_nodes() const;

    // internal to the search; public for the simulate() free function
    SearchNode* allocate_children();
    void count_expansion() { expansions_.fetch_add(1, std::memory_order_relaxed); }
    void count_simulation() { completed_.fetch_add(1, std::memory_order_relaxed); }

private:
    using NodeBlock = std::array<SearchNode, kNumMoves>;

    std::unique_ptr<SearchNode> root_;
    std::deque<std::unique_ptr<NodeBlock>> blocks_;
    std::mutex alloc_mutex_;
    std::atomic<long> expansions_{0};
    std::atomic<long> completed_{0};
};

// argmax_a U(a) + Q(a), with
//   U(a) = c * P(a) * sqrt(sum_a' N(a')) / (1 + N(a))
//   Q(a) = W(a) - L(a)
// Ties resolve to the lowest action index.
Move select_action(const SearchNode& node, const SearchConfig& cfg);

struct SimulationOutcome {
    bool reached_goal = false;
    std::vector<Move> path;  // actions from the root to the terminal leaf
};

// One tree traversal: descend by select_action adding nu to L along the way;
// at an unexpanded leaf either finish (leaf solved), or expand its 12
// children (priors and values from one batched network call) and back the
// leaf's value up the path (W <- max, N <- N+1, L <- L-nu).
SimulationOutcome simulate(SearchTree& tree, const Evaluator& eval,
                           const SearchConfig& cfg);

struct SolveResult {
    bool solved = false;
    std::vector<Move> solution;    // after shortest-path extraction
    std::vector<Move> naive_path;  // the successful simulation's action trace
    long nodes_expanded = 0;
    long simulations = 0;
    std::chrono::milliseconds wall_time{0};
    SearchConfig config;  // snapshot for reproducibility
};

SolveResult solve(const CubeState& start, const Evaluator& eval,
                  const SearchConfig& cfg);

// Undirected unit-weight edge between two observed states.
struct TreeEdge {
    CubeState from;
    CubeState to;
    Move label;
};

// BFS over the merged state graph (nodes with equal states become one
// vertex) from `start` to the solved state. Throws std::logic_error when no
// solved vertex is reachable.
std::vector<Move> shortest_path_in_graph(const CubeState& start,
                                         std::span<const TreeEdge> edges);

// Collects the tree's parent/child edges and runs the graph BFS.
std::vector<Move> extract_shortest_path(const SearchTree& tree);

// Greedy best-first baseline: repeatedly steps to the child maximizing
// R(child) + v(child) (terminal convention: a solved child scores exactly 1)
// until solved or move_limit steps were taken. No tree is kept.
SolveResult greedy_solve(const CubeState& start, const Evaluator& eval,
                         int move_limit);

}  // namespace autocube::mcts
