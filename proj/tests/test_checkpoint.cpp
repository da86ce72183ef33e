#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "autocube/checkpoint.hpp"

using namespace autocube;

namespace {

Checkpoint make_checkpoint(std::uint64_t seed) {
    Checkpoint ckpt;
    ckpt.config = nn::NetworkConfig::desk();
    ckpt.params = nn::init_params<double>(ckpt.config, seed);
    ckpt.metadata = {{"iteration", "123"}, {"seed", "42"}};
    return ckpt;
}

bool params_equal(const nn::NetworkParams<double>& a,
                  const nn::NetworkParams<double>& b) {
    bool equal = a.layer_count() == b.layer_count() && a.rms.size() == b.rms.size();
    if (!equal) return false;
    std::vector<const nn::Dense<double>*> la, lb;
    a.for_each_layer([&](const nn::Dense<double>& l) { la.push_back(&l); });
    b.for_each_layer([&](const nn::Dense<double>& l) { lb.push_back(&l); });
    for (std::size_t i = 0; i < la.size(); ++i)
        if (la[i]->weights != lb[i]->weights || la[i]->bias != lb[i]->bias)
            return false;
    for (std::size_t i = 0; i < a.rms.size(); ++i)
        if (a.rms[i].weights != b.rms[i].weights || a.rms[i].bias != b.rms[i].bias)
            return false;
    return true;
}

}  // namespace

TEST_CASE("save/load round trips bit-identically") {
    Checkpoint ckpt = make_checkpoint(9);
    // non-trivial optimizer state must survive the trip
    ckpt.params.rms[0].weights.setConstant(0.25);
    const std::string bytes = save_checkpoint(ckpt);
    const Checkpoint loaded = load_checkpoint(bytes);
    CHECK(loaded.config == ckpt.config);
    CHECK(loaded.metadata == ckpt.metadata);
    CHECK(params_equal(loaded.params, ckpt.params));

    // byte-stability: canonical serialization means save(load(x)) == x
    CHECK(save_checkpoint(loaded) == bytes);
}

TEST_CASE("file round trip") {
    const Checkpoint ckpt = make_checkpoint(10);
    const auto path = std::filesystem::temp_directory_path() / "autocube_ckpt_test.bin";
    save_checkpoint_file(ckpt, path.string());
    const Checkpoint loaded = load_checkpoint_file(path.string());
    CHECK(params_equal(loaded.params, ckpt.params));
    std::filesystem::remove(path);
}

TEST_CASE("bad magic is rejected") {
    std::string bytes = save_checkpoint(make_checkpoint(1));
    bytes[0] = 'X';
    try {
        load_checkpoint(bytes);
        FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointErrorKind::BadMagic);
    }
}

TEST_CASE("encoding-layout version mismatch is a distinct error") {
    std::string bytes = save_checkpoint(make_checkpoint(2));
    // layout version lives right after the 8-byte magic + u32 format version
    std::uint32_t other_layout = kEncodingLayoutVersion + 1;
    std::memcpy(bytes.data() + 12, &other_layout, sizeof(other_layout));
    try {
        load_checkpoint(bytes);
        FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointErrorKind::LayoutVersion);
    }
}

TEST_CASE("format version mismatch is a distinct error") {
    std::string bytes = save_checkpoint(make_checkpoint(2));
    std::uint32_t other = kCheckpointFormatVersion + 7;
    std::memcpy(bytes.data() + 8, &other, sizeof(other));
    try {
        load_checkpoint(bytes);
        FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointErrorKind::FormatVersion);
    }
}

TEST_CASE("truncated streams are rejected without partial params") {
    const std::string bytes = save_checkpoint(make_checkpoint(3));
    for (const double fraction : {0.10, 0.50, 0.95}) {
        const auto len = static_cast<std::size_t>(bytes.size() * fraction);
        try {
            load_checkpoint(std::string_view(bytes).substr(0, len));
            FAIL("expected CheckpointError at fraction ", fraction);
        } catch (const CheckpointError& e) {
            CHECK(e.kind() == CheckpointErrorKind::Truncated);
        }
    }
    // trailing garbage is also flagged
    try {
        load_checkpoint(bytes + "zzz");
        FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointErrorKind::Truncated);
    }
}

TEST_CASE("shape mismatch between config and arrays is detected") {
    Checkpoint ckpt = make_checkpoint(4);
    ckpt.params.body[0].weights.resize(100, 480);  // no longer matches config
    try {
        save_checkpoint(ckpt);
        FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointErrorKind::ShapeMismatch);
    }
}

TEST_CASE("network config text round trips") {
    nn::NetworkConfig cfg;
    cfg.body_layers = {128, 64};
    cfg.value_head = {32};
    cfg.policy_head = {};
    cfg.learning_rate = 2.5e-4;
    const std::string text = serialize_network_config(cfg);
    const nn::NetworkConfig parsed = parse_network_config(text);
    CHECK(parsed == cfg);
}

TEST_CASE("widen/narrow scalar bridges preserve structure") {
    nn::NetworkConfig cfg;
    cfg.body_layers = {8};
    cfg.value_head = {};
    cfg.policy_head = {};
    const auto pf = nn::init_params<float>(cfg, 6);
    const auto pd = widen_params(pf);
    CHECK(pd.body[0].weights.rows() == pf.body[0].weights.rows());
    const auto pf2 = narrow_params(pd);
    CHECK(pf2.body[0].weights == pf.body[0].weights);
}
