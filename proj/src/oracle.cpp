#include "autocube/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace autocube {

namespace {

// Observed branching is a bit above 9x per level; used only for the
// guardrail message.
std::uint64_t estimated_states(int depth) {
    std::uint64_t n = 1, level = 1;
    for (int d = 1; d <= depth; ++d) {
        level *= (d <= 2) ? 12 : 10;
        n += level;
    }
    return n;
}

constexpr char kTableMagic[8] = {'A', 'C', 'U', 'B', 'D', 'I', 'S', 'T'};
constexpr std::uint32_t kTableVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_raw(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return static_cast<bool>(in);
}

}  // namespace

DistanceTable DistanceTable::build(int max_depth) {
    if (max_depth < 0) throw std::invalid_argument("distance table: negative depth");
    if (max_depth > kMaxSupportedDepth)
        throw std::invalid_argument(
            "distance table: depth " + std::to_string(max_depth) + " needs roughly " +
            std::to_string(estimated_states(max_depth) * 24 / (1 << 20)) +
            " MiB; the supported maximum is " + std::to_string(kMaxSupportedDepth));

    DistanceTable t;
    t.max_depth_ = max_depth;
    t.counts_.assign(static_cast<std::size_t>(max_depth) + 1, 0);

    std::vector<PackedState> frontier{pack(solved_state())};
    t.dist_.emplace(frontier.front(), 0);
    t.counts_[0] = 1;

    for (int depth = 1; depth <= max_depth; ++depth) {
        std::vector<PackedState> next;
        next.reserve(frontier.size() * 10);
        for (const PackedState& key : frontier) {
            const CubeState s = unpack(key);
            for (Move m : kAllMoves) {
                const PackedState child = pack(apply_move(s, m));
                if (t.dist_.emplace(child, static_cast<std::uint8_t>(depth)).second)
                    next.push_back(child);
            }
        }
        t.counts_[depth] = next.size();
        frontier = std::move(next);
    }
    return t;
}

void DistanceTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write distance table: " + path);
    out.write(kTableMagic, sizeof(kTableMagic));
    write_raw(out, kTableVersion);
    write_raw(out, static_cast<std::uint32_t>(max_depth_));
    for (std::uint64_t c : counts_) write_raw(out, c);
    write_raw(out, static_cast<std::uint64_t>(dist_.size()));
    for (const auto& [key, depth] : dist_) {
        write_raw(out, key.corners);
        write_raw(out, key.edges);
        write_raw(out, depth);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

DistanceTable DistanceTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open distance table: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || !std::equal(magic, magic + 8, kTableMagic))
        throw std::runtime_error("not a distance table file: " + path);
    std::uint32_t version = 0, max_depth = 0;
    if (!read_raw(in, version) || version != kTableVersion)
        throw std::runtime_error("unsupported distance table version");
    if (!read_raw(in, max_depth) || max_depth > kMaxSupportedDepth)
        throw std::runtime_error("corrupt distance table header");

    DistanceTable t;
    t.max_depth_ = static_cast<int>(max_depth);
    t.counts_.assign(max_depth + 1, 0);
    for (auto& c : t.counts_)
        if (!read_raw(in, c)) throw std::runtime_error("truncated distance table");
    std::uint64_t entries = 0;
    if (!read_raw(in, entries)) throw std::runtime_error("truncated distance table");
    t.dist_.reserve(entries);
    for (std::uint64_t i = 0; i < entries; ++i) {
        PackedState key;
        std::uint8_t depth = 0;
        if (!read_raw(in, key.corners) || !read_raw(in, key.edges) ||
            !read_raw(in, depth))
            throw std::runtime_error("truncated distance table");
        t.dist_.emplace(key, depth);
    }
    return t;
}

namespace {

struct IdaContext {
    const DistanceTable* table = nullptr;
    int bound = 0;
    std::uint64_t nodes = 0;
    std::vector<Move> path;
    bool found = false;
};

// Returns the smallest f-value that exceeded the bound (for the next
// iteration), or stops early once a solution is found.
int ida_search(IdaContext& ctx, const CubeState& s, int g, int last_move) {
    ++ctx.nodes;
    const int h = ctx.table->lower_bound(s);
    const int f = g + h;
    if (f > ctx.bound) return f;
    if (is_solved(s)) {
        ctx.found = true;
        return f;
    }
    int min_over = std::numeric_limits<int>::max();
    for (Move m : kAllMoves) {
        // adjacent inverse pairs can never appear in a shortest solution
        if (last_move >= 0 && m == inverse(move_from_index(last_move))) continue;
        ctx.path.push_back(m);
        const int t = ida_search(ctx, apply_move(s, m), g + 1, move_index(m));
        if (ctx.found) return t;
        ctx.path.pop_back();
        min_over = std::min(min_over, t);
    }
    return min_over;
}

}  // namespace

OptimalResult optimal_solve(const CubeState& start, int depth_cap,
                            const DistanceTable& table) {
    if (depth_cap < 0 || depth_cap > kMaxOptimalDepth)
        throw std::invalid_argument("optimal_solve: depth cap out of range [0, " +
                                    std::to_string(kMaxOptimalDepth) + "]");
    OptimalResult result;
    if (is_solved(start)) {
        result.within_cap = true;
        result.nodes_visited = 1;
        return result;
    }
    for (int bound = table.lower_bound(start); bound <= depth_cap; ++bound) {
        IdaContext ctx;
        ctx.table = &table;
        ctx.bound = bound;
        ida_search(ctx, start, 0, -1);
        result.nodes_visited += ctx.nodes;
        if (ctx.found) {
            result.within_cap = true;
            result.solution = std::move(ctx.path);
            return result;
        }
    }
    return result;  // cap exceeded
}

}  // namespace autocube
