#include "flowgest/net/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace flowgest::net {

namespace {

constexpr char kMagic[8] = {'F', 'L', 'O', 'W', 'G', 'E', 'S', 'T'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ofstream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::ifstream& in, const std::string& path) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) fail("'" + path + "' is truncated");
    return v;
}

}  // namespace

void save_checkpoint(ResNetF& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write checkpoint '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    const std::string cfg = model.config().to_json();
    write_u32(out, static_cast<uint32_t>(cfg.size()));
    out.write(cfg.data(), cfg.size());
    auto views = model.state_views();
    write_u32(out, static_cast<uint32_t>(views.size()));
    for (const auto& v : views) {
        write_u32(out, static_cast<uint32_t>(v.name.size()));
        out.write(v.name.data(), v.name.size());
        for (int d : v.dims) write_u32(out, static_cast<uint32_t>(d));
        out.write(reinterpret_cast<const char*>(v.data), v.size() * sizeof(float));
    }
    if (!out.flush()) fail("checkpoint write failed for '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        fail("'" + path + "' is not a checkpoint file");
    const uint32_t version = read_u32(in, path);
    if (version != kVersion)
        fail("'" + path + "': unsupported checkpoint version " + std::to_string(version));
    std::string cfg(read_u32(in, path), '\0');
    in.read(cfg.data(), cfg.size());
    if (!in) fail("'" + path + "' is truncated");

    Checkpoint ckpt;
    ckpt.config = NetConfig::from_json(cfg);
    const uint32_t count = read_u32(in, path);
    for (uint32_t i = 0; i < count; ++i) {
        std::string name(read_u32(in, path), '\0');
        in.read(name.data(), name.size());
        uint32_t dims[4];
        for (uint32_t& d : dims) d = read_u32(in, path);
        TensorF t(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                  static_cast<int>(dims[2]), static_cast<int>(dims[3]));
        in.read(reinterpret_cast<char*>(t.data.data()), t.size() * sizeof(float));
        if (!in) fail("'" + path + "' is truncated");
        ckpt.tensors.emplace(std::move(name), std::move(t));
    }
    return ckpt;
}

ResNetF load_checkpoint(const std::string& path) {
    Checkpoint ckpt = read_checkpoint(path);
    Rng rng(0);  // overwritten below
    ResNetF model(ckpt.config, rng);
    for (auto& v : model.state_views()) {
        auto it = ckpt.tensors.find(v.name);
        if (it == ckpt.tensors.end()) fail("'" + path + "': missing tensor '" + v.name + "'");
        if (it->second.size() != v.size())
            fail("'" + path + "': size mismatch for tensor '" + v.name + "'");
        std::memcpy(v.data, it->second.data.data(), v.size() * sizeof(float));
    }
    return model;
}

}  // namespace flowgest::net
