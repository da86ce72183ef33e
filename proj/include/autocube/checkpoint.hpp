#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "autocube/nn.hpp"

namespace autocube {

// On-disk network snapshot: versioned header, canonical config text, free
// metadata, then raw little-endian f64 arrays (weights column-major) for
// every layer followed by the RMSProp accumulators, in serialized layer
// order. Full layout in docs/formats.md.
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

// Version of the 20x24 input layout the parameters were trained against.
inline constexpr std::uint32_t kEncodingLayoutVersion = 1;

enum class CheckpointErrorKind {
    BadMagic,
    FormatVersion,
    LayoutVersion,
    Truncated,
    ShapeMismatch,
    BadConfig,
};

class CheckpointError : public std::runtime_error {
public:
    CheckpointError(CheckpointErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    CheckpointErrorKind kind() const { return kind_; }

private:
    CheckpointErrorKind kind_;
};

struct Checkpoint {
    nn::NetworkConfig config;
    nn::NetworkParams<double> params;
    std::map<std::string, std::string> metadata;  // e.g. iteration, seed
};

std::string save_checkpoint(const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::string_view bytes);

void save_checkpoint_file(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint_file(const std::string& path);

// Canonical key=value form of a NetworkConfig (used inside checkpoints and
// by the training config loader).
std::string serialize_network_config(const nn::NetworkConfig& cfg);
nn::NetworkConfig parse_network_config(const std::string& text);

class KeyValueConfig;
nn::NetworkConfig network_config_from_kv(const KeyValueConfig& kv);
void network_config_to_kv(const nn::NetworkConfig& cfg, KeyValueConfig& kv);
extern const std::set<std::string> kNetworkConfigKeys;

// Scalar bridges for the optional f32 training path.
nn::NetworkParams<double> widen_params(const nn::NetworkParams<float>& p);
nn::NetworkParams<float> narrow_params(const nn::NetworkParams<double>& p);

}  // namespace autocube
