#pragma once

#include <map>
#include <string>

#include "flowgest/net/model.hpp"

namespace flowgest::net {

// Self-describing container: magic, version, config JSON echo, then named
// tensors in the flat binary format (4 x u32 dims + f32 data).
void save_checkpoint(ResNetF& model, const std::string& path);

struct Checkpoint {
    NetConfig config;
    std::map<std::string, TensorF> tensors;
};

Checkpoint read_checkpoint(const std::string& path);
ResNetF load_checkpoint(const std::string& path);

}  // namespace flowgest::net
