#include "autocube/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "autocube/config.hpp"

namespace autocube {

namespace {

constexpr char kMagic[8] = {'A', 'C', 'U', 'B', 'C', 'K', 'P', 'T'};
constexpr char kTrailer[8] = {'A', 'C', 'U', 'B', 'E', 'N', 'D', '\0'};

void append_raw(std::string& out, const void* data, std::size_t len) {
    out.append(static_cast<const char*>(data), len);
}

template <typename T>
void append_value(std::string& out, T value) {
    append_raw(out, &value, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    void read(void* dst, std::size_t len, const char* what) {
        if (offset_ + len > bytes_.size())
            throw CheckpointError(CheckpointErrorKind::Truncated,
                                  std::string("checkpoint truncated while reading ") + what);
        std::memcpy(dst, bytes_.data() + offset_, len);
        offset_ += len;
    }

    template <typename T>
    T read_value(const char* what) {
        T v;
        read(&v, sizeof(T), what);
        return v;
    }

    std::string read_string(std::size_t len, const char* what) {
        std::string s(len, '\0');
        read(s.data(), len, what);
        return s;
    }

    bool exhausted() const { return offset_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t offset_ = 0;
};

void append_dense(std::string& out, const nn::Dense<double>& layer) {
    append_value<std::uint64_t>(out, static_cast<std::uint64_t>(layer.weights.rows()));
    append_value<std::uint64_t>(out, static_cast<std::uint64_t>(layer.weights.cols()));
    append_raw(out, layer.weights.data(),
               sizeof(double) * static_cast<std::size_t>(layer.weights.size()));
    append_value<std::uint64_t>(out, static_cast<std::uint64_t>(layer.bias.size()));
    append_raw(out, layer.bias.data(),
               sizeof(double) * static_cast<std::size_t>(layer.bias.size()));
}

nn::Dense<double> read_dense(Reader& r, int expect_rows, int expect_cols,
                             const char* what) {
    const auto rows = r.read_value<std::uint64_t>(what);
    const auto cols = r.read_value<std::uint64_t>(what);
    if (rows != static_cast<std::uint64_t>(expect_rows) ||
        cols != static_cast<std::uint64_t>(expect_cols))
        throw CheckpointError(CheckpointErrorKind::ShapeMismatch,
                              std::string("checkpoint layer shape mismatch in ") + what +
                                  ": got " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + ", config expects " +
                                  std::to_string(expect_rows) + "x" +
                                  std::to_string(expect_cols));
    nn::Dense<double> layer;
    layer.weights.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    r.read(layer.weights.data(), sizeof(double) * rows * cols, what);
    const auto bias_len = r.read_value<std::uint64_t>(what);
    if (bias_len != rows)
        throw CheckpointError(CheckpointErrorKind::ShapeMismatch,
                              std::string("checkpoint bias length mismatch in ") + what);
    layer.bias.resize(static_cast<Eigen::Index>(bias_len));
    r.read(layer.bias.data(), sizeof(double) * bias_len, what);
    return layer;
}

void validate_against_config(const nn::NetworkConfig& cfg,
                             const nn::NetworkParams<double>& params) {
    const auto shapes = nn::layer_shapes(cfg);
    if (shapes.size() != params.layer_count() || params.rms.size() != shapes.size())
        throw CheckpointError(CheckpointErrorKind::ShapeMismatch,
                              "parameter layer count does not match config");
    std::size_t k = 0;
    params.for_each_layer([&](const nn::Dense<double>& layer) {
        const auto [out, in] = shapes[k];
        if (layer.weights.rows() != out || layer.weights.cols() != in ||
            layer.bias.size() != out)
            throw CheckpointError(CheckpointErrorKind::ShapeMismatch,
                                  "parameter shapes do not match config at layer " +
                                      std::to_string(k));
        ++k;
    });
}

}  // namespace

const std::set<std::string> kNetworkConfigKeys = {
    "body_layers",   "value_head",      "policy_head",
    "input_size",    "policy_outputs",  "learning_rate",
    "rmsprop_decay", "rmsprop_epsilon", "policy_loss_weight",
};

void network_config_to_kv(const nn::NetworkConfig& cfg, KeyValueConfig& kv) {
    kv.set_int_list("body_layers", cfg.body_layers);
    kv.set_int_list("value_head", cfg.value_head);
    kv.set_int_list("policy_head", cfg.policy_head);
    kv.set_int("input_size", cfg.input_size);
    kv.set_int("policy_outputs", cfg.policy_outputs);
    kv.set_double("learning_rate", cfg.learning_rate);
    kv.set_double("rmsprop_decay", cfg.rmsprop_decay);
    kv.set_double("rmsprop_epsilon", cfg.rmsprop_epsilon);
    kv.set_double("policy_loss_weight", cfg.policy_loss_weight);
}

nn::NetworkConfig network_config_from_kv(const KeyValueConfig& kv) {
    nn::NetworkConfig cfg;
    cfg.body_layers = kv.get_int_list("body_layers", cfg.body_layers);
    cfg.value_head = kv.get_int_list("value_head", cfg.value_head);
    cfg.policy_head = kv.get_int_list("policy_head", cfg.policy_head);
    cfg.input_size = static_cast<int>(kv.get_int("input_size", cfg.input_size));
    cfg.policy_outputs = static_cast<int>(kv.get_int("policy_outputs", cfg.policy_outputs));
    cfg.learning_rate = kv.get_double("learning_rate", cfg.learning_rate);
    cfg.rmsprop_decay = kv.get_double("rmsprop_decay", cfg.rmsprop_decay);
    cfg.rmsprop_epsilon = kv.get_double("rmsprop_epsilon", cfg.rmsprop_epsilon);
    cfg.policy_loss_weight = kv.get_double("policy_loss_weight", cfg.policy_loss_weight);
    cfg.validate();
    return cfg;
}

std::string serialize_network_config(const nn::NetworkConfig& cfg) {
    KeyValueConfig kv;
    network_config_to_kv(cfg, kv);
    return kv.serialize();
}

nn::NetworkConfig parse_network_config(const std::string& text) {
    return network_config_from_kv(KeyValueConfig::parse_string(text));
}

std::string save_checkpoint(const Checkpoint& ckpt) {
    ckpt.config.validate();
    validate_against_config(ckpt.config, ckpt.params);

    std::string out;
    append_raw(out, kMagic, sizeof(kMagic));
    append_value<std::uint32_t>(out, kCheckpointFormatVersion);
    append_value<std::uint32_t>(out, kEncodingLayoutVersion);

    KeyValueConfig meta;
    for (const auto& [key, value] : ckpt.metadata) meta.set(key, value);
    const std::string meta_text = meta.serialize();
    append_value<std::uint64_t>(out, meta_text.size());
    out += meta_text;

    const std::string config_text = serialize_network_config(ckpt.config);
    append_value<std::uint64_t>(out, config_text.size());
    out += config_text;

    append_value<std::uint64_t>(out, ckpt.params.layer_count());
    ckpt.params.for_each_layer(
        [&](const nn::Dense<double>& layer) { append_dense(out, layer); });
    for (const auto& acc : ckpt.params.rms) append_dense(out, acc);

    append_raw(out, kTrailer, sizeof(kTrailer));
    return out;
}

Checkpoint load_checkpoint(std::string_view bytes) {
    Reader r(bytes);
    char magic[8];
    r.read(magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError(CheckpointErrorKind::BadMagic, "not a checkpoint file");
    const auto format = r.read_value<std::uint32_t>("format version");
    if (format != kCheckpointFormatVersion)
        throw CheckpointError(CheckpointErrorKind::FormatVersion,
                              "unsupported checkpoint format version " +
                                  std::to_string(format) + " (expected " +
                                  std::to_string(kCheckpointFormatVersion) + ")");
    const auto layout = r.read_value<std::uint32_t>("layout version");
    if (layout != kEncodingLayoutVersion)
        throw CheckpointError(CheckpointErrorKind::LayoutVersion,
                              "checkpoint uses input-encoding layout version " +
                                  std::to_string(layout) + ", this build expects " +
                                  std::to_string(kEncodingLayoutVersion));

    Checkpoint ckpt;
    const auto meta_len = r.read_value<std::uint64_t>("metadata length");
    const std::string meta_text = r.read_string(meta_len, "metadata");
    try {
        ckpt.metadata = KeyValueConfig::parse_string(meta_text).values();
    } catch (const std::exception& e) {
        throw CheckpointError(CheckpointErrorKind::BadConfig,
                              std::string("bad checkpoint metadata: ") + e.what());
    }

    const auto config_len = r.read_value<std::uint64_t>("config length");
    const std::string config_text = r.read_string(config_len, "config");
    try {
        ckpt.config = parse_network_config(config_text);
    } catch (const CheckpointError&) {
        throw;
    } catch (const std::exception& e) {
        throw CheckpointError(CheckpointErrorKind::BadConfig,
                              std::string("bad checkpoint config: ") + e.what());
    }

    const auto shapes = nn::layer_shapes(ckpt.config);
    const auto layer_count = r.read_value<std::uint64_t>("layer count");
    if (layer_count != shapes.size())
        throw CheckpointError(CheckpointErrorKind::ShapeMismatch,
                              "checkpoint layer count " + std::to_string(layer_count) +
                                  " does not match config (" +
                                  std::to_string(shapes.size()) + ")");

    const std::size_t body_n = ckpt.config.body_layers.size();
    const std::size_t value_n = ckpt.config.value_head.size() + 1;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        auto layer = read_dense(r, shapes[i].first, shapes[i].second, "parameters");
        if (i < body_n)
            ckpt.params.body.push_back(std::move(layer));
        else if (i < body_n + value_n)
            ckpt.params.value_head.push_back(std::move(layer));
        else
            ckpt.params.policy_head.push_back(std::move(layer));
    }
    for (std::size_t i = 0; i < shapes.size(); ++i)
        ckpt.params.rms.push_back(
            read_dense(r, shapes[i].first, shapes[i].second, "optimizer state"));

    char trailer[8];
    r.read(trailer, sizeof(trailer), "trailer");
    if (std::memcmp(trailer, kTrailer, sizeof(kTrailer)) != 0 || !r.exhausted())
        throw CheckpointError(CheckpointErrorKind::Truncated,
                              "checkpoint trailer corrupt or trailing bytes present");
    return ckpt;
}

void save_checkpoint_file(const Checkpoint& ckpt, const std::string& path) {
    const std::string bytes = save_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_checkpoint(buf.str());
}

namespace {

template <class From, class To>
nn::NetworkParams<To> cast_params(const nn::NetworkParams<From>& p) {
    nn::NetworkParams<To> out;
    auto cast_section = [](const std::vector<nn::Dense<From>>& src,
                           std::vector<nn::Dense<To>>& dst) {
        dst.reserve(src.size());
        for (const auto& layer : src)
            dst.push_back({layer.weights.template cast<To>(),
                           layer.bias.template cast<To>()});
    };
    cast_section(p.body, out.body);
    cast_section(p.value_head, out.value_head);
    cast_section(p.policy_head, out.policy_head);
    cast_section(p.rms, out.rms);
    return out;
}

}  // namespace

nn::NetworkParams<double> widen_params(const nn::NetworkParams<float>& p) {
    return cast_params<float, double>(p);
}

nn::NetworkParams<float> narrow_params(const nn::NetworkParams<double>& p) {
    return cast_params<double, float>(p);
}

}  // namespace autocube
