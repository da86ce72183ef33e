#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autocube/rng.hpp"

namespace autocube {

// ---------------------------------------------------------------------------
// Moves
// ---------------------------------------------------------------------------

enum class Face : std::uint8_t { F = 0, B, L, R, U, D };

// The 12 quarter-turn actions. Index order is fixed and observable (action
// indices appear in tie-breaking rules, policy outputs and file formats):
//   0:F 1:F' 2:B 3:B' 4:L 5:L' 6:R 7:R' 8:U 9:U' 10:D 11:D'
enum class Move : std::uint8_t {
    F = 0, Fp, B, Bp, L, Lp, R, Rp, U, Up, D, Dp
};

inline constexpr int kNumMoves = 12;
inline constexpr int kNumFaces = 6;

constexpr std::uint8_t move_index(Move m) { return static_cast<std::uint8_t>(m); }
constexpr Move move_from_index(int i) { return static_cast<Move>(i); }
constexpr Face face_of(Move m) { return static_cast<Face>(move_index(m) >> 1); }
constexpr bool is_clockwise(Move m) { return (move_index(m) & 1u) == 0; }
constexpr Move inverse(Move m) { return static_cast<Move>(move_index(m) ^ 1u); }
constexpr Move make_move(Face f, bool clockwise) {
    return static_cast<Move>((static_cast<std::uint8_t>(f) << 1) | (clockwise ? 0u : 1u));
}

inline constexpr std::array<Move, kNumMoves> kAllMoves = {
    Move::F, Move::Fp, Move::B, Move::Bp, Move::L, Move::Lp,
    Move::R, Move::Rp, Move::U, Move::Up, Move::D, Move::Dp,
};

// ---------------------------------------------------------------------------
// Cube state
// ---------------------------------------------------------------------------

// Cubelet-level configuration. Arrays are indexed by SLOT (the fixed location
// in space); the value says which PIECE currently sits there and how it is
// twisted relative to the slot's reference sticker.
//
// Corner slots: 0:URF 1:UFL 2:ULB 3:UBR 4:DFR 5:DLF 6:DBL 7:DRB
// Edge slots:   0:UR 1:UF 2:UL 3:UB 4:DR 5:DF 6:DL 7:DB 8:FR 9:FL 10:BL 11:BR
// (see docs/encoding.md for the full sticker-level definition)
struct CubeState {
    std::array<std::uint8_t, 8> corner_perm;
    std::array<std::uint8_t, 8> corner_orient;   // values in {0,1,2}
    std::array<std::uint8_t, 12> edge_perm;
    std::array<std::uint8_t, 12> edge_orient;    // values in {0,1}

    friend bool operator==(const CubeState&, const CubeState&) = default;
};

CubeState solved_state();
bool is_solved(const CubeState& s);

// +1 at the goal state, -1 everywhere else.
inline int reward(const CubeState& s) { return is_solved(s) ? 1 : -1; }

CubeState apply_move(const CubeState& s, Move m);
CubeState apply_moves(CubeState s, std::span<const Move> moves);

// Group inverse: inverse_state(s) composed with s is the identity.
CubeState inverse_state(const CubeState& s);

// Checks the structural invariants: both permutations are bijections,
// orientation sums are 0 mod 3 / mod 2, and the permutation parities agree.
bool is_valid(const CubeState& s);

// ---------------------------------------------------------------------------
// Packed key (hashing, distance tables)
// ---------------------------------------------------------------------------

// corners: 8 slots x (3-bit piece | 2-bit twist)  -> 40 bits
// edges:  12 slots x (4-bit piece | 1-bit flip)   -> 60 bits
struct PackedState {
    std::uint64_t corners = 0;
    std::uint64_t edges = 0;

    friend bool operator==(const PackedState&, const PackedState&) = default;
};

PackedState pack(const CubeState& s);
CubeState unpack(const PackedState& p);

struct PackedStateHash {
    std::size_t operator()(const PackedState& p) const {
        return static_cast<std::size_t>(mix64(p.corners, p.edges));
    }
};

struct CubeStateHash {
    std::size_t operator()(const CubeState& s) const {
        return PackedStateHash{}(pack(s));
    }
};

// ---------------------------------------------------------------------------
// Network encoding
// ---------------------------------------------------------------------------

// 20x24 one-hot grid, stored sparsely as the hot column of each row.
// Row r < 8 is corner piece r, row 8+e is edge piece e. The hot column is
//   corner: slot * 3 + twist      (24 = 8 slots x 3 twists)
//   edge:   slot * 2 + flip       (24 = 12 slots x 2 flips)
// Flattened network inputs use index row * 24 + column.
struct EncodedState {
    static constexpr int kRows = 20;
    static constexpr int kCols = 24;
    static constexpr int kFlat = kRows * kCols;  // 480

    std::array<std::uint8_t, kRows> hot;

    friend bool operator==(const EncodedState&, const EncodedState&) = default;
};

EncodedState encode(const CubeState& s);

// Exact inverse of encode on valid grids; throws std::invalid_argument if the
// grid does not describe a permutation.
CubeState decode(const EncodedState& e);

// ---------------------------------------------------------------------------
// Scrambling
// ---------------------------------------------------------------------------

struct ScrambleSequence {
    std::vector<Move> moves;
    std::uint64_t seed = 0;
};

// `depth` uniform i.i.d. moves from the solved state. depth >= 1.
std::pair<CubeState, ScrambleSequence> scramble(int depth, Rng& rng);
std::pair<CubeState, ScrambleSequence> scramble(int depth, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Notation and files
// ---------------------------------------------------------------------------

class MoveParseError : public std::runtime_error {
public:
    MoveParseError(const std::string& what, int token_index)
        : std::runtime_error(what), token_index_(token_index) {}
    int token_index() const { return token_index_; }

private:
    int token_index_;
};

std::string move_name(Move m);
Move parse_move(std::string_view token);

// Whitespace-separated Singmaster tokens ("R U R'"). Errors carry the
// 1-based token position.
std::vector<Move> parse_moves(std::string_view text);
std::string format_moves(std::span<const Move> moves);

// One scramble per line; '#' starts a comment; blank lines skipped.
std::vector<std::vector<Move>> parse_scramble_lines(std::istream& in);
std::vector<std::vector<Move>> load_scramble_file(const std::string& path);
void write_scramble_file(const std::string& path,
                         std::span<const std::vector<Move>> scrambles,
                         const std::string& header_comment = {});

// 54-character sticker string in U1..U9 R1..R9 F1..F9 D1..D9 L1..L9 B1..B9
// order; each character is the face letter of the sticker's home face.
std::string to_facelet_string(const CubeState& s);

// Multi-line unfolded-cube diagram for terminal output.
std::string to_net_diagram(const CubeState& s);

}  // namespace autocube
