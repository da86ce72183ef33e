#include "autocube/cube.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace autocube {

namespace {

// A move table has the same shape as a state: it is the configuration the
// move produces from solved, and acts on states by right multiplication.
struct MoveTable {
    std::array<std::uint8_t, 8> cp;
    std::array<std::uint8_t, 8> co;
    std::array<std::uint8_t, 12> ep;
    std::array<std::uint8_t, 12> eo;
};

// Clockwise quarter turns. cp[slot] / ep[slot] name the slot the arriving
// piece comes from; co / eo are the twist added to the arriving piece.
// Slot numbering and orientation references are pinned in docs/encoding.md.
constexpr MoveTable kTurnF = {
    {1, 5, 2, 3, 0, 4, 6, 7},
    {1, 2, 0, 0, 2, 1, 0, 0},
    {0, 9, 2, 3, 4, 8, 6, 7, 1, 5, 10, 11},
    {0, 1, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0},
};
constexpr MoveTable kTurnB = {
    {0, 1, 3, 7, 4, 5, 2, 6},
    {0, 0, 1, 2, 0, 0, 2, 1},
    {0, 1, 2, 11, 4, 5, 6, 10, 8, 9, 3, 7},
    {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 1},
};
constexpr MoveTable kTurnL = {
    {0, 2, 6, 3, 4, 1, 5, 7},
    {0, 1, 2, 0, 0, 2, 1, 0},
    {0, 1, 10, 3, 4, 5, 9, 7, 8, 2, 6, 11},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
};
constexpr MoveTable kTurnR = {
    {4, 1, 2, 0, 7, 5, 6, 3},
    {2, 0, 0, 1, 1, 0, 0, 2},
    {8, 1, 2, 3, 11, 5, 6, 7, 4, 9, 10, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
};
constexpr MoveTable kTurnU = {
    {3, 0, 1, 2, 4, 5, 6, 7},
    {0, 0, 0, 0, 0, 0, 0, 0},
    {3, 0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
};
constexpr MoveTable kTurnD = {
    {0, 1, 2, 3, 5, 6, 7, 4},
    {0, 0, 0, 0, 0, 0, 0, 0},
    {0, 1, 2, 3, 5, 6, 7, 4, 8, 9, 10, 11},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
};

constexpr MoveTable compose(const MoveTable& a, const MoveTable& b) {
    MoveTable r{};
    for (int i = 0; i < 8; ++i) {
        r.cp[i] = a.cp[b.cp[i]];
        r.co[i] = static_cast<std::uint8_t>((a.co[b.cp[i]] + b.co[i]) % 3);
    }
    for (int i = 0; i < 12; ++i) {
        r.ep[i] = a.ep[b.ep[i]];
        r.eo[i] = static_cast<std::uint8_t>((a.eo[b.ep[i]] + b.eo[i]) % 2);
    }
    return r;
}

constexpr MoveTable prime(const MoveTable& t) {
    return compose(compose(t, t), t);
}

// Indexed by move_index: F F' B B' L L' R R' U U' D D'.
constexpr std::array<MoveTable, kNumMoves> kMoveTables = {
    kTurnF, prime(kTurnF), kTurnB, prime(kTurnB), kTurnL, prime(kTurnL),
    kTurnR, prime(kTurnR), kTurnU, prime(kTurnU), kTurnD, prime(kTurnD),
};

constexpr char kFaceLetters[kNumFaces + 1] = "FBLRUD";

template <std::size_t N>
bool is_permutation_array(const std::array<std::uint8_t, N>& a) {
    std::array<bool, N> seen{};
    for (auto v : a) {
        if (v >= N || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

template <std::size_t N>
int permutation_parity(const std::array<std::uint8_t, N>& a) {
    int inversions = 0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
            if (a[i] > a[j]) ++inversions;
    return inversions & 1;
}

}  // namespace

CubeState solved_state() {
    CubeState s{};
    for (int i = 0; i < 8; ++i) s.corner_perm[i] = static_cast<std::uint8_t>(i);
    for (int i = 0; i < 12; ++i) s.edge_perm[i] = static_cast<std::uint8_t>(i);
    return s;
}

bool is_solved(const CubeState& s) {
    for (int i = 0; i < 8; ++i)
        if (s.corner_perm[i] != i || s.corner_orient[i] != 0) return false;
    for (int i = 0; i < 12; ++i)
        if (s.edge_perm[i] != i || s.edge_orient[i] != 0) return false;
    return true;
}

CubeState apply_move(const CubeState& s, Move m) {
    const MoveTable& t = kMoveTables[move_index(m)];
    CubeState r;
    for (int i = 0; i < 8; ++i) {
        const std::uint8_t from = t.cp[i];
        r.corner_perm[i] = s.corner_perm[from];
        r.corner_orient[i] =
            static_cast<std::uint8_t>((s.corner_orient[from] + t.co[i]) % 3);
    }
    for (int i = 0; i < 12; ++i) {
        const std::uint8_t from = t.ep[i];
        r.edge_perm[i] = s.edge_perm[from];
        r.edge_orient[i] =
            static_cast<std::uint8_t>((s.edge_orient[from] + t.eo[i]) % 2);
    }
    return r;
}

CubeState apply_moves(CubeState s, std::span<const Move> moves) {
    for (Move m : moves) s = apply_move(s, m);
    return s;
}

CubeState inverse_state(const CubeState& s) {
    CubeState r{};
    for (int i = 0; i < 8; ++i) r.corner_perm[s.corner_perm[i]] = static_cast<std::uint8_t>(i);
    for (int i = 0; i < 8; ++i)
        r.corner_orient[i] =
            static_cast<std::uint8_t>((3 - s.corner_orient[r.corner_perm[i]]) % 3);
    for (int i = 0; i < 12; ++i) r.edge_perm[s.edge_perm[i]] = static_cast<std::uint8_t>(i);
    for (int i = 0; i < 12; ++i)
        r.edge_orient[i] = s.edge_orient[r.edge_perm[i]];
    return r;
}

bool is_valid(const CubeState& s) {
    if (!is_permutation_array(s.corner_perm) || !is_permutation_array(s.edge_perm))
        return false;
    int corner_twist = 0;
    for (auto o : s.corner_orient) {
        if (o > 2) return false;
        corner_twist += o;
    }
    if (corner_twist % 3 != 0) return false;
    int edge_flip = 0;
    for (auto o : s.edge_orient) {
        if (o > 1) return false;
        edge_flip += o;
    }
    if (edge_flip % 2 != 0) return false;
    return permutation_parity(s.corner_perm) == permutation_parity(s.edge_perm);
}

PackedState pack(const CubeState& s) {
    PackedState p;
    for (int i = 0; i < 8; ++i) {
        const std::uint64_t v = s.corner_perm[i] | (std::uint64_t{s.corner_orient[i]} << 3);
        p.corners |= v << (5 * i);
    }
    for (int i = 0; i < 12; ++i) {
        const std::uint64_t v = s.edge_perm[i] | (std::uint64_t{s.edge_orient[i]} << 4);
        p.edges |= v << (5 * i);
    }
    return p;
}

CubeState unpack(const PackedState& p) {
    CubeState s{};
    for (int i = 0; i < 8; ++i) {
        const auto v = static_cast<std::uint8_t>((p.corners >> (5 * i)) & 0x1f);
        s.corner_perm[i] = v & 0x7;
        s.corner_orient[i] = v >> 3;
    }
    for (int i = 0; i < 12; ++i) {
        const auto v = static_cast<std::uint8_t>((p.edges >> (5 * i)) & 0x1f);
        s.edge_perm[i] = v & 0xf;
        s.edge_orient[i] = v >> 4;
    }
    return s;
}

EncodedState encode(const CubeState& s) {
    EncodedState e{};
    for (int slot = 0; slot < 8; ++slot)
        e.hot[s.corner_perm[slot]] =
            static_cast<std::uint8_t>(slot * 3 + s.corner_orient[slot]);
    for (int slot = 0; slot < 12; ++slot)
        e.hot[8 + s.edge_perm[slot]] =
            static_cast<std::uint8_t>(slot * 2 + s.edge_orient[slot]);
    return e;
}

CubeState decode(const EncodedState& e) {
    CubeState s{};
    std::array<bool, 8> corner_filled{};
    std::array<bool, 12> edge_filled{};
    for (int piece = 0; piece < 8; ++piece) {
        const int col = e.hot[piece];
        if (col >= EncodedState::kCols)
            throw std::invalid_argument("decode: corner column out of range");
        const int slot = col / 3;
        if (corner_filled[slot])
            throw std::invalid_argument("decode: two corners in one slot");
        corner_filled[slot] = true;
        s.corner_perm[slot] = static_cast<std::uint8_t>(piece);
        s.corner_orient[slot] = static_cast<std::uint8_t>(col % 3);
    }
    for (int piece = 0; piece < 12; ++piece) {
        const int col = e.hot[8 + piece];
        if (col >= EncodedState::kCols)
            throw std::invalid_argument("decode: edge column out of range");
        const int slot = col / 2;
        if (edge_filled[slot])
            throw std::invalid_argument("decode: two edges in one slot");
        edge_filled[slot] = true;
        s.edge_perm[slot] = static_cast<std::uint8_t>(piece);
        s.edge_orient[slot] = static_cast<std::uint8_t>(col % 2);
    }
    return s;
}

std::pair<CubeState, ScrambleSequence> scramble(int depth, Rng& rng) {
    if (depth < 1)
        throw std::invalid_argument("scramble: depth must be >= 1");
    ScrambleSequence seq;
    seq.moves.reserve(static_cast<std::size_t>(depth));
    CubeState s = solved_state();
    for (int i = 0; i < depth; ++i) {
        const Move m = move_from_index(static_cast<int>(rng.below(kNumMoves)));
        seq.moves.push_back(m);
        s = apply_move(s, m);
    }
    return {s, std::move(seq)};
}

std::pair<CubeState, ScrambleSequence> scramble(int depth, std::uint64_t seed) {
    Rng rng(seed);
    auto result = scramble(depth, rng);
    result.second.seed = seed;
    return result;
}

std::string move_name(Move m) {
    std::string name(1, kFaceLetters[static_cast<int>(face_of(m))]);
    if (!is_clockwise(m)) name += '\'';
    return name;
}

Move parse_move(std::string_view token) {
    if (token.empty() || token.size() > 2)
        throw MoveParseError("bad move token '" + std::string(token) + "'", 1);
    const char* pos = std::char_traits<char>::find(kFaceLetters, kNumFaces, token[0]);
    if (pos == nullptr)
        throw MoveParseError("unknown face '" + std::string(token) + "'", 1);
    const auto face = static_cast<Face>(pos - kFaceLetters);
    if (token.size() == 2 && token[1] != '\'')
        throw MoveParseError("bad move suffix in '" + std::string(token) + "'", 1);
    return make_move(face, token.size() == 1);
}

std::vector<Move> parse_moves(std::string_view text) {
    std::vector<Move> moves;
    std::istringstream in{std::string(text)};
    std::string token;
    int index = 0;
    while (in >> token) {
        ++index;
        try {
            moves.push_back(parse_move(token));
        } catch (const MoveParseError& e) {
            throw MoveParseError(std::string(e.what()) + " at token " +
                                     std::to_string(index),
                                 index);
        }
    }
    return moves;
}

std::string format_moves(std::span<const Move> moves) {
    std::string out;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        if (i > 0) out += ' ';
        out += move_name(moves[i]);
    }
    return out;
}

std::vector<std::vector<Move>> parse_scramble_lines(std::istream& in) {
    std::vector<std::vector<Move>> scrambles;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        bool blank = line.find_first_not_of(" \t\r\n") == std::string::npos;
        if (blank) continue;
        try {
            scrambles.push_back(parse_moves(line));
        } catch (const MoveParseError& e) {
            throw std::runtime_error("scramble file line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return scrambles;
}

std::vector<std::vector<Move>> load_scramble_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scramble file: " + path);
    return parse_scramble_lines(in);
}

void write_scramble_file(const std::string& path,
                         std::span<const std::vector<Move>> scrambles,
                         const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scramble file: " + path);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    for (const auto& seq : scrambles) out << format_moves(seq) << "\n";
}

namespace {

// Sticker positions of every slot, as indices into the 54-char facelet string
// (face order U R F D L B, 9 per face, row-major within the face).
constexpr int kCornerFacelet[8][3] = {
    {8, 9, 20},  {6, 18, 38}, {0, 36, 47}, {2, 45, 11},
    {29, 26, 15}, {27, 44, 24}, {33, 53, 42}, {35, 17, 51},
};
constexpr int kEdgeFacelet[12][2] = {
    {5, 10}, {7, 19}, {3, 37}, {1, 46}, {32, 16}, {28, 25},
    {30, 43}, {34, 52}, {23, 12}, {21, 41}, {50, 39}, {48, 14},
};
constexpr char kCornerColor[8][3] = {
    {'U', 'R', 'F'}, {'U', 'F', 'L'}, {'U', 'L', 'B'}, {'U', 'B', 'R'},
    {'D', 'F', 'R'}, {'D', 'L', 'F'}, {'D', 'B', 'L'}, {'D', 'R', 'B'},
};
constexpr char kEdgeColor[12][2] = {
    {'U', 'R'}, {'U', 'F'}, {'U', 'L'}, {'U', 'B'}, {'D', 'R'}, {'D', 'F'},
    {'D', 'L'}, {'D', 'B'}, {'F', 'R'}, {'F', 'L'}, {'B', 'L'}, {'B', 'R'},
};

}  // namespace

std::string to_facelet_string(const CubeState& s) {
    std::string f(54, '?');
    f[4] = 'U'; f[13] = 'R'; f[22] = 'F'; f[31] = 'D'; f[40] = 'L'; f[49] = 'B';
    for (int slot = 0; slot < 8; ++slot) {
        const int piece = s.corner_perm[slot];
        const int twist = s.corner_orient[slot];
        for (int k = 0; k < 3; ++k)
            f[kCornerFacelet[slot][(k + twist) % 3]] = kCornerColor[piece][k];
    }
    for (int slot = 0; slot < 12; ++slot) {
        const int piece = s.edge_perm[slot];
        const int flip = s.edge_orient[slot];
        for (int k = 0; k < 2; ++k)
            f[kEdgeFacelet[slot][(k + flip) % 2]] = kEdgeColor[piece][k];
    }
    return f;
}

std::string to_net_diagram(const CubeState& s) {
    const std::string f = to_facelet_string(s);
    auto face_row = [&](int base, int row) {
        std::string out;
        for (int c = 0; c < 3; ++c) {
            if (c > 0) out += ' ';
            out += f[base + 3 * row + c];
        }
        return out;
    };
    std::string out;
    for (int r = 0; r < 3; ++r) out += "        " + face_row(0, r) + "\n";
    for (int r = 0; r < 3; ++r) {
        out += face_row(36, r) + "   " + face_row(18, r) + "   " + face_row(9, r) +
               "   " + face_row(45, r) + "\n";
    }
    for (int r = 0; r < 3; ++r) out += "        " + face_row(27, r) + "\n";
    return out;
}

}  // namespace autocube
