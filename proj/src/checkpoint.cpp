#include "asr/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "asr/errors.hpp"

namespace asr {

namespace {

using nlohmann::json;

constexpr std::array<char, 4> kMagic{'A', 'T', 'A', 'D'};
constexpr std::uint32_t kVersion = 1;

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

json attention_to_json(const AttentionSpec& spec) {
    json j;
    if (std::holds_alternative<IdentityAttention>(spec)) {
        j["kind"] = "identity";
    } else if (const auto* m = std::get_if<ManualAttention>(&spec)) {
        j["kind"] = "manual";
        j["sixths"] = m->sixths;
    } else if (const auto* l = std::get_if<LearnableAttention>(&spec)) {
        j["kind"] = "learnable";
        j["columns"] = l->columns;
    } else {
        j["kind"] = "conditional";
        j["proj_dim"] = std::get<ConditionalAttention>(spec).proj_dim;
    }
    return j;
}

AttentionSpec attention_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") return IdentityAttention{};
    if (kind == "manual") {
        ManualAttention m;
        m.sixths = j.at("sixths").get<std::array<int, 3>>();
        return m;
    }
    if (kind == "learnable") {
        LearnableAttention l;
        l.columns = j.at("columns").get<std::array<int, 3>>();
        return l;
    }
    if (kind == "conditional") {
        ConditionalAttention c;
        c.proj_dim = j.at("proj_dim").get<std::int64_t>();
        return c;
    }
    throw CheckpointError("unknown attention kind: " + kind);
}

json config_to_json(const ModelConfig& cfg) {
    json j;
    j["feature_dim"] = cfg.feature_dim;
    j["conv"] = {{"kernel_width", cfg.conv.kernel_width},
                 {"stride", cfg.conv.stride},
                 {"out_channels", cfg.conv.out_channels}};
    j["gru_hidden"] = cfg.gru_hidden;
    j["num_gru"] = cfg.num_gru;
    j["symbols"] = cfg.symbols;
    j["attention"] = attention_to_json(cfg.attention);
    return j;
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.feature_dim = j.at("feature_dim").get<std::int64_t>();
    cfg.conv.kernel_width = j.at("conv").at("kernel_width").get<std::int64_t>();
    cfg.conv.stride = j.at("conv").at("stride").get<std::int64_t>();
    cfg.conv.out_channels = j.at("conv").at("out_channels").get<std::int64_t>();
    cfg.gru_hidden = j.at("gru_hidden").get<std::int64_t>();
    cfg.num_gru = j.at("num_gru").get<int>();
    cfg.symbols = j.at("symbols").get<std::string>();
    cfg.attention = attention_from_json(j.at("attention"));
    cfg.validate();
    return cfg;
}

struct Writer {
    std::string bytes;

    void raw(const void* p, std::size_t n) {
        bytes.append(static_cast<const char*>(p), n);
    }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u16(std::uint16_t v) {
        const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
        raw(b, 2);
    }
    void u32(std::uint32_t v) {
        const unsigned char b[4] = {
            static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
            static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        raw(b, 4);
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
};

struct Reader {
    const unsigned char* p;
    std::size_t left;

    void need(std::size_t n) const {
        if (left < n) throw CheckpointError("checkpoint truncated");
    }
    void raw(void* out, std::size_t n) {
        need(n);
        std::memcpy(out, p, n);
        p += n;
        left -= n;
    }
    std::uint8_t u8() {
        std::uint8_t v;
        raw(&v, 1);
        return v;
    }
    std::uint16_t u16() {
        unsigned char b[2];
        raw(b, 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32() {
        unsigned char b[4];
        raw(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        left -= n;
        return s;
    }
};

void write_tensor_record(Writer& w, const std::string& name, const Tensor& t) {
    if (name.size() > UINT16_MAX) throw CheckpointError("tensor name too long");
    if (t.ndim() > 255) throw CheckpointError("tensor rank too large");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(name.data(), name.size());
    w.u8(static_cast<std::uint8_t>(t.ndim()));
    for (auto d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.data) w.f32(static_cast<float>(v));
}

std::pair<std::string, TensorPtr> read_tensor_record(Reader& r) {
    const std::uint16_t name_len = r.u16();
    std::string name = r.str(name_len);
    const std::uint8_t ndim = r.u8();
    if (ndim == 0) throw CheckpointError("tensor '" + name + "' has rank 0");
    std::vector<std::int64_t> shape(ndim);
    for (auto& d : shape) {
        d = r.u32();
        if (d < 1) throw CheckpointError("tensor '" + name + "' has a zero dimension");
    }
    const std::int64_t n = shape_product(shape);
    std::vector<double> data(static_cast<std::size_t>(n));
    for (auto& v : data) v = static_cast<double>(r.f32());
    return {std::move(name), Tensor::from(shape, std::move(data))};
}

std::string container_bytes(const std::string& blob,
                            const std::map<std::string, TensorPtr>& tensors) {
    Writer w;
    w.raw(kMagic.data(), kMagic.size());
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(blob.size()));
    w.raw(blob.data(), blob.size());
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) write_tensor_record(w, name, *t);
    const std::uint32_t crc =
        crc32({reinterpret_cast<const unsigned char*>(w.bytes.data()), w.bytes.size()});
    w.u32(crc);
    return std::move(w.bytes);
}

std::pair<std::string, std::map<std::string, TensorPtr>> parse_container(const std::string& bytes,
                                                                         const std::string& path) {
    if (bytes.size() < kMagic.size() + 12) throw CheckpointError(path + ": file too small");
    const std::size_t body = bytes.size() - 4;
    Reader crc_reader{reinterpret_cast<const unsigned char*>(bytes.data()) + body, 4};
    const std::uint32_t stored_crc = crc_reader.u32();
    const std::uint32_t actual_crc =
        crc32({reinterpret_cast<const unsigned char*>(bytes.data()), body});
    if (stored_crc != actual_crc) throw CheckpointError(path + ": CRC mismatch (corrupt file)");

    Reader r{reinterpret_cast<const unsigned char*>(bytes.data()), body};
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kMagic.data(), 4) != 0) throw CheckpointError(path + ": bad magic");
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw CheckpointError(path + ": unsupported version " + std::to_string(version));
    }
    const std::uint32_t blob_len = r.u32();
    std::string blob = r.str(blob_len);
    const std::uint32_t count = r.u32();
    std::map<std::string, TensorPtr> tensors;
    for (std::uint32_t i = 0; i < count; ++i) {
        auto [name, t] = read_tensor_record(r);
        if (!tensors.emplace(std::move(name), std::move(t)).second) {
            throw CheckpointError(path + ": duplicate tensor name");
        }
    }
    if (r.left != 0) throw CheckpointError(path + ": trailing bytes");
    return {std::move(blob), std::move(tensors)};
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot read " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

std::uint32_t crc32(std::span<const unsigned char> bytes) {
    static const auto table = make_crc_table();
    std::uint32_t c = 0xffffffffu;
    for (unsigned char b : bytes) c = table[(c ^ b) & 0xffu] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

std::string config_to_json_string(const ModelConfig& config, const CheckpointMeta& meta) {
    json j;
    j["config"] = config_to_json(config);
    j["meta"] = {{"epoch", meta.epoch}, {"seed", meta.seed}, {"loss_digest", meta.loss_digest}};
    return j.dump();
}

void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelParams& params,
                     const CheckpointMeta& meta) {
    config.validate();
    write_file(path, container_bytes(config_to_json_string(config, meta), params.values));
}

Checkpoint load_checkpoint(const std::string& path) {
    auto [blob, tensors] = parse_container(read_file(path), path);
    json j;
    try {
        j = json::parse(blob);
    } catch (const json::exception& e) {
        throw CheckpointError(path + ": bad config blob: " + e.what());
    }
    Checkpoint ckpt;
    try {
        ckpt.config = config_from_json(j.at("config"));
        ckpt.meta.epoch = j.at("meta").at("epoch").get<std::int64_t>();
        ckpt.meta.seed = j.at("meta").at("seed").get<std::uint64_t>();
        ckpt.meta.loss_digest = j.at("meta").at("loss_digest").get<std::uint32_t>();
    } catch (const json::exception& e) {
        throw CheckpointError(path + ": bad config blob: " + e.what());
    }
    ckpt.tensors = std::move(tensors);

    // The parameter set must be exactly the one the config induces.
    auto shapes = param_shapes(ckpt.config);
    if (shapes.size() != ckpt.tensors.size()) {
        throw CheckpointError(path + ": tensor count does not match the config");
    }
    for (const auto& [name, shape] : shapes) {
        auto it = ckpt.tensors.find(name);
        if (it == ckpt.tensors.end()) throw CheckpointError(path + ": missing tensor " + name);
        if (it->second->shape != shape) throw CheckpointError(path + ": bad shape for " + name);
    }
    return ckpt;
}

void save_tensor_file(const std::string& path, const Tensor& t) {
    std::map<std::string, TensorPtr> tensors;
    tensors.emplace("data", Tensor::from(t.shape, t.data));
    write_file(path, container_bytes("{\"kind\":\"tensor\"}", tensors));
}

TensorPtr load_tensor_file(const std::string& path) {
    auto [blob, tensors] = parse_container(read_file(path), path);
    auto it = tensors.find("data");
    if (it == tensors.end()) throw CheckpointError(path + ": not a tensor file");
    return it->second;
}

ModelParams params_from_checkpoint(const Checkpoint& ckpt) {
    ModelParams params;
    for (const auto& [name, t] : ckpt.tensors) {
        auto copy = Tensor::from(t->shape, t->data, true);
        params.values.emplace(name, std::move(copy));
    }
    return params;
}

}  // namespace asr
