#include <cstdint>
#include <cstring>
#include <fstream>

#include "flowgest/error.hpp"
#include "flowgest/flow.hpp"

namespace flowgest::flow {

namespace {
constexpr char kMagic[4] = {'F', 'L', 'O', 'W'};
}

void write_flow_raw(const FlowField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write '" + path + "'");
    uint32_t header[3] = {static_cast<uint32_t>(f.width()), static_cast<uint32_t>(f.height()), 0};
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(f.u.v.data()), f.u.size() * sizeof(float));
    out.write(reinterpret_cast<const char*>(f.v.v.data()), f.v.size() * sizeof(float));
    if (!out.flush()) fail("flow write failed for '" + path + "'");
}

FlowField read_flow_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    char magic[4];
    uint32_t header[3];
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        fail("'" + path + "' is not a raw flow file");
    const int w = static_cast<int>(header[0]);
    const int h = static_cast<int>(header[1]);
    if (w <= 0 || h <= 0 || static_cast<int64_t>(w) * h > (1 << 28))
        fail("'" + path + "': implausible dimensions");
    FlowField f(w, h);
    in.read(reinterpret_cast<char*>(f.u.v.data()), f.u.size() * sizeof(float));
    in.read(reinterpret_cast<char*>(f.v.v.data()), f.v.size() * sizeof(float));
    if (!in) fail("'" + path + "' is truncated");
    return f;
}

}  // namespace flowgest::flow
