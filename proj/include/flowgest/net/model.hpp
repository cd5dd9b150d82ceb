#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowgest/net/ops.hpp"

namespace flowgest::net {

enum class BlockType { Basic, Bottleneck };

struct NetConfig {
    std::vector<int> stage_blocks{1, 1, 1, 1};
    int base_width = 16;
    int num_classes = 15;
    int input_channels = 2 * 10;  // L=10 pairs, magnitude + direction each
    float dropout_p = 0.5f;
    BlockType block = BlockType::Basic;

    // stages [1,1,1,1], width 16: the desk-scale default
    static NetConfig small_preset();
    // stages [3,4,23,3], bottleneck, width 64: the full-depth preset
    static NetConfig bn_resnet101();
    static NetConfig preset(const std::string& name);  // "small" | "bn-resnet101"

    // classic depth count: stem conv + block convs + fc (projections excluded)
    int weighted_layers() const;

    void validate() const;
    std::string to_json() const;
    static NetConfig from_json(const std::string& json);
};

// Named view into a parameter or running-stat buffer; grad is null for
// running statistics.
template <typename T>
struct TensorView {
    std::string name;
    T* data = nullptr;
    T* grad = nullptr;
    std::array<int, 4> dims{1, 1, 1, 1};
    size_t size() const {
        return static_cast<size_t>(dims[0]) * dims[1] * dims[2] * dims[3];
    }
};

// conv -> BN, the repeating unit of the network
template <typename T>
struct ConvBn {
    Tensor4<T> w, dw;
    BnState<T> bn;
    std::vector<T> dgamma, dbeta;
    ConvSpec spec;

    // training caches
    Tensor4<T> x_in, conv_out;
    BnCache<T> bn_cache;

    void init(int out_c, int in_c, int kernel, int stride, Rng& rng);
    Tensor4<T> forward(const Tensor4<T>& x, bool training);
    Tensor4<T> backward(const Tensor4<T>& dy, bool need_dx);
    void collect(const std::string& prefix, std::vector<TensorView<T>>& out);
};

template <typename T>
struct ResidualBlock {
    BlockType type = BlockType::Basic;
    ConvBn<T> cb1, cb2, cb3;      // cb3 used by bottleneck only
    std::optional<ConvBn<T>> proj;  // 1x1 shortcut when shape changes

    Tensor4<T> relu1_out, relu2_out, out_cache, x_in;

    void init(BlockType type, int in_c, int width, int stride, Rng& rng);
    int out_channels(int width) const {
        return type == BlockType::Bottleneck ? 4 * width : width;
    }
    Tensor4<T> forward(const Tensor4<T>& x, bool training);
    Tensor4<T> backward(const Tensor4<T>& dy);
    void collect(const std::string& prefix, std::vector<TensorView<T>>& out);
};

template <typename T>
class ResNet {
public:
    ResNet(const NetConfig& cfg, Rng& init_rng);

    const NetConfig& config() const { return cfg_; }

    // logits [N, num_classes, 1, 1]; dropout_rng required when training
    // with dropout_p > 0
    Tensor4<T> forward(const Tensor4<T>& x, bool training, Rng* dropout_rng = nullptr);
    // uses the caches of the last training-mode forward
    void backward(const Tensor4<T>& dlogits);

    std::vector<TensorView<T>> param_views();   // trainable only
    std::vector<TensorView<T>> state_views();   // params + running stats
    void zero_grads();
    size_t param_count();

    // replace the first convolution kernel (e.g. cross-modality init)
    void set_stem_kernel(const Tensor4<T>& w);

private:
    NetConfig cfg_;
    ConvBn<T> stem_;
    std::vector<std::vector<ResidualBlock<T>>> stages_;
    Tensor4<T> fc_w_, fc_b_, fc_dw_, fc_db_;
    float dropout_p_;

    // forward caches
    Tensor4<T> stem_relu_out_, pool_out_, gap_in_, gap_out_, drop_out_;
    PoolCache<T> pool_cache_;
    DropoutCache<T> drop_cache_;
    int gap_h_ = 0, gap_w_ = 0;
};

using ResNetF = ResNet<float>;
using ResNetD = ResNet<double>;

}  // namespace flowgest::net
