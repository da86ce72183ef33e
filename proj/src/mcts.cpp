#include "autocube/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace autocube::mcts {

namespace {

void atomic_add(std::atomic<float>& a, float v) {
    float cur = a.load(std::memory_order_relaxed);
    while (!a.compare_exchange_weak(cur, cur + v, std::memory_order_relaxed)) {
    }
}

void atomic_max(std::atomic<float>& a, float v) {
    float cur = a.load(std::memory_order_relaxed);
    while (cur < v && !a.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
    }
}

void reset_node(SearchNode& n) {
    n.parent = nullptr;
    n.move_from_parent = 0;
    n.cached_value = 0;
    n.prior.fill(0);
    for (int a = 0; a < kNumMoves; ++a) {
        n.visit_count[a].store(0, std::memory_order_relaxed);
        n.max_value[a].store(0, std::memory_order_relaxed);
        n.virtual_loss[a].store(0, std::memory_order_relaxed);
    }
    n.expand_state.store(0, std::memory_order_relaxed);
    n.children = nullptr;
}

// Materializes the 12 children of `leaf` with priors and cached values from
// one batched evaluation. Caller must own the expansion (state 0 -> 1) and
// publish (state -> 2) afterwards.
void expand_children(SearchTree& tree, SearchNode* leaf, const Evaluator& eval) {
    SearchNode* block = tree.allocate_children();
    std::array<CubeState, kNumMoves> child_states;
    for (int a = 0; a < kNumMoves; ++a)
        child_states[a] = apply_move(leaf->state, move_from_index(a));
    const Evaluator::Result result = eval.evaluate(child_states);
    for (int a = 0; a < kNumMoves; ++a) {
        SearchNode& child = block[a];
        reset_node(child);
        child.state = child_states[a];
        child.parent = leaf;
        child.move_from_parent = static_cast<std::uint8_t>(a);
        child.cached_value = static_cast<float>(result.values[a]);
        for (int p = 0; p < kNumMoves; ++p)
            child.prior[p] = static_cast<float>(result.policies[a][p]);
    }
    leaf->children = block;
    tree.count_expansion();
}

void backup(std::span<const std::pair<SearchNode*, int>> path, float value,
            float nu) {
    for (const auto& [node, action] : path) {
        atomic_max(node->max_value[action], value);
        node->visit_count[action].fetch_add(1, std::memory_order_relaxed);
        atomic_add(node->virtual_loss[action], -nu);
    }
}

std::vector<Move> path_moves(std::span<const std::pair<SearchNode*, int>> path) {
    std::vector<Move> moves;
    moves.reserve(path.size());
    for (const auto& [node, action] : path) moves.push_back(move_from_index(action));
    return moves;
}

}  // namespace

void SearchConfig::validate() const {
    if (exploration_c <= 0)
        throw std::invalid_argument("search config: exploration_c must be > 0");
    if (virtual_loss_nu < 0)
        throw std::invalid_argument("search config: virtual_loss_nu must be >= 0");
    if (worker_count < 1)
        throw std::invalid_argument("search config: worker_count must be >= 1");
    if (time_limit.count() <= 0 && max_simulations <= 0)
        throw std::invalid_argument(
            "search config: need a finite time limit or simulation cap");
}

SearchTree::SearchTree(const CubeState& root_state, const Evaluator& eval) {
    root_ = std::make_unique<SearchNode>();
    reset_node(*root_);
    root_->state = root_state;
    const Evaluator::Result self = eval.evaluate(std::span(&root_->state, 1));
    root_->cached_value = static_cast<float>(self.values[0]);
    for (int a = 0; a < kNumMoves; ++a)
        root_->prior[a] = static_cast<float>(self.policies[0][a]);
    root_->expand_state.store(1, std::memory_order_relaxed);
    expand_children(*this, root_.get(), eval);
    root_->expand_state.store(2, std::memory_order_release);
}

SearchNode* SearchTree::allocate_children() {
    auto block = std::make_unique<NodeBlock>();
    SearchNode* ptr = block->data();
    std::lock_guard<std::mutex> lock(alloc_mutex_);
    blocks_.push_back(std::move(block));
    return ptr;
}

std::vector<const SearchNode*> SearchTree::all_nodes() const {
    std::vector<const SearchNode*> nodes;
    std::vector<const SearchNode*> stack{root_.get()};
    while (!stack.empty()) {
        const SearchNode* n = stack.back();
        stack.pop_back();
        nodes.push_back(n);
        if (n->expanded())
            for (int a = kNumMoves - 1; a >= 0; --a) stack.push_back(n->children + a);
    }
    return nodes;
}

Move select_action(const SearchNode& node, const SearchConfig& cfg) {
    double total_visits = 0;
    for (int a = 0; a < kNumMoves; ++a)
        total_visits += node.visit_count[a].load(std::memory_order_relaxed);
    const double sqrt_total = std::sqrt(total_visits);

    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumMoves; ++a) {
        const double n = node.visit_count[a].load(std::memory_order_relaxed);
        const double u =
            cfg.exploration_c * node.prior[a] * sqrt_total / (1.0 + n);
        const double q = static_cast<double>(node.max_value[a].load(std::memory_order_relaxed)) -
                         static_cast<double>(node.virtual_loss[a].load(std::memory_order_relaxed));
        const double score = u + q;
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return move_from_index(best);
}

SimulationOutcome simulate(SearchTree& tree, const Evaluator& eval,
                           const SearchConfig& cfg) {
    const auto nu = static_cast<float>(cfg.virtual_loss_nu);
    SearchNode* node = tree.root();
    std::vector<std::pair<SearchNode*, int>> path;

    for (;;) {
        const int state = node->expand_state.load(std::memory_order_acquire);
        if (state == 2) {
            const int action = move_index(select_action(*node, cfg));
            atomic_add(node->virtual_loss[action], nu);
            path.emplace_back(node, action);
            node = node->children + action;
            continue;
        }
        if (state == 1) {
            // another worker is materializing this leaf; wait and re-check
            while (!node->expanded()) std::this_thread::yield();
            continue;
        }
        // unexpanded leaf
        if (is_solved(node->state)) {
            backup(path, node->cached_value, nu);
            tree.count_simulation();
            return {true, path_moves(path)};
        }
        int expected = 0;
        if (!node->expand_state.compare_exchange_strong(expected, 1,
                                                        std::memory_order_acq_rel))
            continue;  // lost the race; re-read the state
        expand_children(tree, node, eval);
        node->expand_state.store(2, std::memory_order_release);

        if (cfg.solved_child_shortcut) {
            for (int a = 0; a < kNumMoves; ++a) {
                if (is_solved(node->children[a].state)) {
                    backup(path, node->cached_value, nu);
                    tree.count_simulation();
                    std::vector<Move> moves = path_moves(path);
                    moves.push_back(move_from_index(a));
                    return {true, std::move(moves)};
                }
            }
        }
        backup(path, node->cached_value, nu);
        tree.count_simulation();
        return {false, {}};
    }
}

SolveResult solve(const CubeState& start, const Evaluator& eval,
                  const SearchConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult result;
    result.config = cfg;
    if (is_solved(start)) {
        result.solved = true;
        result.wall_time = std::chrono::milliseconds(0);
        return result;
    }

    SearchTree tree(start, eval);
    std::atomic<bool> stop{false};
    std::atomic<bool> found{false};
    std::atomic<long> tickets{0};
    std::mutex result_mutex;
    std::vector<Move> winning_path;

    const bool timed = cfg.time_limit.count() > 0;
    const auto deadline = t0 + cfg.time_limit;

    // root expansion may already expose the goal when the shortcut is on
    if (cfg.solved_child_shortcut) {
        for (int a = 0; a < kNumMoves; ++a) {
            if (is_solved(tree.root()->children[a].state)) {
                found.store(true);
                winning_path = {move_from_index(a)};
                break;
            }
        }
    }

    auto worker = [&]() {
        while (!stop.load(std::memory_order_acquire)) {
            if (timed && std::chrono::steady_clock::now() >= deadline) {
                stop.store(true);
                break;
            }
            if (cfg.max_simulations > 0 &&
                tickets.fetch_add(1, std::memory_order_relaxed) >= cfg.max_simulations) {
                stop.store(true);
                break;
            }
            SimulationOutcome outcome = simulate(tree, eval, cfg);
            if (outcome.reached_goal) {
                {
                    std::lock_guard<std::mutex> lock(result_mutex);
                    if (!found.exchange(true)) winning_path = std::move(outcome.path);
                }
                stop.store(true);
                break;
            }
        }
    };

    if (!found.load()) {
        if (cfg.worker_count == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(cfg.worker_count));
            for (int i = 0; i < cfg.worker_count; ++i) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
    }

    result.solved = found.load();
    result.nodes_expanded = tree.expansions();
    result.simulations = tree.completed_simulations();
    if (result.solved) {
        result.naive_path = winning_path;
        result.solution = extract_shortest_path(tree);
    }
    result.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - t0);
    return result;
}

std::vector<Move> shortest_path_in_graph(const CubeState& start,
                                         std::span<const TreeEdge> edges) {
    std::unordered_map<PackedState, int, PackedStateHash> ids;
    std::vector<std::vector<std::pair<int, Move>>> adjacency;
    int goal = -1;
    auto vertex = [&](const CubeState& s) {
        const auto [it, inserted] = ids.try_emplace(pack(s), static_cast<int>(ids.size()));
        if (inserted) {
            adjacency.emplace_back();
            if (is_solved(s)) goal = it->second;
        }
        return it->second;
    };

    const int source = vertex(start);
    for (const TreeEdge& e : edges) {
        const int u = vertex(e.from);
        const int v = vertex(e.to);
        adjacency[static_cast<std::size_t>(u)].emplace_back(v, e.label);
        adjacency[static_cast<std::size_t>(v)].emplace_back(u, inverse(e.label));
    }
    if (goal < 0)
        throw std::logic_error("path extraction: no solved state in the search graph");

    std::vector<int> prev_vertex(adjacency.size(), -1);
    std::vector<Move> prev_move(adjacency.size(), Move::F);
    std::vector<bool> seen(adjacency.size(), false);
    std::vector<int> queue{source};
    seen[static_cast<std::size_t>(source)] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        if (u == goal) break;
        for (const auto& [v, label] : adjacency[static_cast<std::size_t>(u)]) {
            if (seen[static_cast<std::size_t>(v)]) continue;
            seen[static_cast<std::size_t>(v)] = true;
            prev_vertex[static_cast<std::size_t>(v)] = u;
            prev_move[static_cast<std::size_t>(v)] = label;
            queue.push_back(v);
        }
    }
    if (!seen[static_cast<std::size_t>(goal)])
        throw std::logic_error("path extraction: solved state unreachable");

    std::vector<Move> moves;
    for (int v = goal; v != source; v = prev_vertex[static_cast<std::size_t>(v)])
        moves.push_back(prev_move[static_cast<std::size_t>(v)]);
    std::reverse(moves.begin(), moves.end());
    return moves;
}

std::vector<Move> extract_shortest_path(const SearchTree& tree) {
    std::vector<TreeEdge> edges;
    for (const SearchNode* node : tree.all_nodes()) {
        if (!node->expanded()) continue;
        for (int a = 0; a < kNumMoves; ++a)
            edges.push_back({node->state, node->children[a].state, move_from_index(a)});
    }
    return shortest_path_in_graph(tree.root()->state, edges);
}

SolveResult greedy_solve(const CubeState& start, const Evaluator& eval,
                         int move_limit) {
    if (move_limit < 0)
        throw std::invalid_argument("greedy_solve: move_limit must be >= 0");
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult result;
    result.config = SearchConfig{};
    CubeState s = start;
    for (int step = 0; step < move_limit && !is_solved(s); ++step) {
        std::array<CubeState, kNumMoves> children;
        for (int a = 0; a < kNumMoves; ++a)
            children[a] = apply_move(s, move_from_index(a));
        const Evaluator::Result scores = eval.evaluate(children);
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < kNumMoves; ++a) {
            const double score =
                is_solved(children[a]) ? 1.0 : -1.0 + scores.values[static_cast<std::size_t>(a)];
            if (score > best_score) {
                best_score = score;
                best = a;
            }
        }
        result.solution.push_back(move_from_index(best));
        s = children[best];
        ++result.nodes_expanded;
    }
    result.solved = is_solved(s);
    result.naive_path = result.solution;
    result.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - t0);
    return result;
}

}  // namespace autocube::mcts
