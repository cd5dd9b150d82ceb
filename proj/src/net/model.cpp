#include "flowgest/net/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace flowgest::net {

using nlohmann::json;

NetConfig NetConfig::small_preset() { return NetConfig{}; }

NetConfig NetConfig::bn_resnet101() {
    NetConfig cfg;
    cfg.stage_blocks = {3, 4, 23, 3};
    cfg.base_width = 64;
    cfg.block = BlockType::Bottleneck;
    return cfg;
}

NetConfig NetConfig::preset(const std::string& name) {
    if (name == "small") return small_preset();
    if (name == "bn-resnet101") return bn_resnet101();
    fail("unknown net preset '" + name + "' (expected small or bn-resnet101)");
}

int NetConfig::weighted_layers() const {
    const int per_block = block == BlockType::Bottleneck ? 3 : 2;
    int blocks = 0;
    for (int b : stage_blocks) blocks += b;
    return 1 + per_block * blocks + 1;
}

void NetConfig::validate() const {
    if (stage_blocks.empty() || stage_blocks.size() > 8) fail("NetConfig: bad stage count");
    for (int b : stage_blocks)
        if (b < 1) fail("NetConfig: stage block counts must be >= 1");
    if (base_width < 1) fail("NetConfig: base_width must be >= 1");
    if (num_classes < 2) fail("NetConfig: num_classes must be >= 2");
    if (input_channels < 1) fail("NetConfig: input_channels must be >= 1");
    if (dropout_p < 0.f || dropout_p >= 1.f) fail("NetConfig: dropout_p must be in [0, 1)");
}

std::string NetConfig::to_json() const {
    json j;
    j["stage_blocks"] = stage_blocks;
    j["base_width"] = base_width;
    j["num_classes"] = num_classes;
    j["input_channels"] = input_channels;
    j["dropout_p"] = dropout_p;
    j["block"] = block == BlockType::Bottleneck ? "bottleneck" : "basic";
    return j.dump();
}

NetConfig NetConfig::from_json(const std::string& text) {
    NetConfig cfg;
    json j;
    try {
        j = json::parse(text);
        cfg.stage_blocks = j.at("stage_blocks").get<std::vector<int>>();
        cfg.base_width = j.at("base_width").get<int>();
        cfg.num_classes = j.at("num_classes").get<int>();
        cfg.input_channels = j.at("input_channels").get<int>();
        cfg.dropout_p = j.at("dropout_p").get<float>();
        const std::string b = j.at("block").get<std::string>();
        if (b == "bottleneck")
            cfg.block = BlockType::Bottleneck;
        else if (b == "basic")
            cfg.block = BlockType::Basic;
        else
            fail("NetConfig: unknown block type '" + b + "'");
    } catch (const json::exception& e) {
        fail(std::string("NetConfig: bad json: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

template <typename T>
void he_init(Tensor4<T>& w, int fan_in, Rng& rng) {
    const double stddev = std::sqrt(2.0 / fan_in);
    for (T& v : w.data) v = static_cast<T>(rng.normal(0.0, stddev));
}

template <typename T>
TensorView<T> view_of(const std::string& name, Tensor4<T>& t, Tensor4<T>* grad) {
    return TensorView<T>{name, t.data.data(), grad ? grad->data.data() : nullptr,
                         {t.n, t.c, t.h, t.w}};
}

template <typename T>
TensorView<T> view_of_vec(const std::string& name, std::vector<T>& v, std::vector<T>* grad) {
    return TensorView<T>{name, v.data(), grad ? grad->data() : nullptr,
                         {1, static_cast<int>(v.size()), 1, 1}};
}

}  // namespace

template <typename T>
void ConvBn<T>::init(int out_c, int in_c, int kernel, int stride, Rng& rng) {
    w = Tensor4<T>(out_c, in_c, kernel, kernel);
    dw = Tensor4<T>(out_c, in_c, kernel, kernel);
    he_init(w, in_c * kernel * kernel, rng);
    bn = BnState<T>(out_c);
    dgamma.assign(out_c, T(0));
    dbeta.assign(out_c, T(0));
    spec.stride = stride;
    spec.pad = kernel / 2;
}

template <typename T>
Tensor4<T> ConvBn<T>::forward(const Tensor4<T>& x, bool training) {
    Tensor4<T> conv = conv2d_forward(x, w, spec);
    Tensor4<T> y = batchnorm_forward(conv, bn, training, training ? &bn_cache : nullptr);
    if (training) {
        x_in = x;
        conv_out = std::move(conv);
    }
    return y;
}

template <typename T>
Tensor4<T> ConvBn<T>::backward(const Tensor4<T>& dy, bool need_dx) {
    BnGrads<T> bg = batchnorm_backward(conv_out, bn, bn_cache, dy);
    for (size_t i = 0; i < dgamma.size(); ++i) {
        dgamma[i] += bg.dgamma[i];
        dbeta[i] += bg.dbeta[i];
    }
    ConvGrads<T> cg = conv2d_backward(x_in, w, spec, bg.dx, need_dx);
    for (size_t i = 0; i < w.size(); ++i) dw.data[i] += cg.dw.data[i];
    return need_dx ? std::move(cg.dx) : Tensor4<T>();
}

template <typename T>
void ConvBn<T>::collect(const std::string& prefix, std::vector<TensorView<T>>& out) {
    out.push_back(view_of(prefix + ".w", w, &dw));
    out.push_back(view_of_vec(prefix + ".bn.gamma", bn.gamma, &dgamma));
    out.push_back(view_of_vec(prefix + ".bn.beta", bn.beta, &dbeta));
    out.push_back(view_of_vec<T>(prefix + ".bn.running_mean", bn.running_mean, nullptr));
    out.push_back(view_of_vec<T>(prefix + ".bn.running_var", bn.running_var, nullptr));
}

template <typename T>
void ResidualBlock<T>::init(BlockType t, int in_c, int width, int stride, Rng& rng) {
    type = t;
    const int out_c = out_channels(width);
    if (type == BlockType::Basic) {
        cb1.init(width, in_c, 3, stride, rng);
        cb2.init(width, width, 3, 1, rng);
    } else {
        cb1.init(width, in_c, 1, 1, rng);
        cb2.init(width, width, 3, stride, rng);  // stride on the 3x3
        cb3.init(out_c, width, 1, 1, rng);
    }
    if (stride != 1 || in_c != out_c) {
        proj.emplace();
        proj->init(out_c, in_c, 1, stride, rng);
    }
}

template <typename T>
Tensor4<T> ResidualBlock<T>::forward(const Tensor4<T>& x, bool training) {
    Tensor4<T> shortcut = proj ? proj->forward(x, training) : x;
    Tensor4<T> h = relu_forward(cb1.forward(x, training));
    Tensor4<T> body;
    if (type == BlockType::Basic) {
        if (training) relu1_out = h;
        body = cb2.forward(h, training);
    } else {
        if (training) relu1_out = h;
        Tensor4<T> h2 = relu_forward(cb2.forward(h, training));
        if (training) relu2_out = h2;
        body = cb3.forward(h2, training);
    }
    if (!body.same_shape(shortcut)) fail("residual block: shortcut shape mismatch");
    for (size_t i = 0; i < body.size(); ++i) body.data[i] += shortcut.data[i];
    Tensor4<T> y = relu_forward(body);
    if (training) {
        x_in = x;
        out_cache = y;
    }
    return y;
}

template <typename T>
Tensor4<T> ResidualBlock<T>::backward(const Tensor4<T>& dy) {
    Tensor4<T> dsum = relu_backward(out_cache, dy);
    Tensor4<T> dx;
    if (type == BlockType::Basic) {
        Tensor4<T> dh = cb2.backward(dsum, true);
        dh = relu_backward(relu1_out, dh);
        dx = cb1.backward(dh, true);
    } else {
        Tensor4<T> dh2 = cb3.backward(dsum, true);
        dh2 = relu_backward(relu2_out, dh2);
        Tensor4<T> dh = cb2.backward(dh2, true);
        dh = relu_backward(relu1_out, dh);
        dx = cb1.backward(dh, true);
    }
    if (proj) {
        Tensor4<T> dshort = proj->backward(dsum, true);
        for (size_t i = 0; i < dx.size(); ++i) dx.data[i] += dshort.data[i];
    } else {
        for (size_t i = 0; i < dx.size(); ++i) dx.data[i] += dsum.data[i];
    }
    return dx;
}

template <typename T>
void ResidualBlock<T>::collect(const std::string& prefix, std::vector<TensorView<T>>& out) {
    cb1.collect(prefix + ".conv1", out);
    cb2.collect(prefix + ".conv2", out);
    if (type == BlockType::Bottleneck) cb3.collect(prefix + ".conv3", out);
    if (proj) proj->collect(prefix + ".proj", out);
}

template <typename T>
ResNet<T>::ResNet(const NetConfig& cfg, Rng& init_rng) : cfg_(cfg) {
    cfg_.validate();
    dropout_p_ = cfg_.dropout_p;
    stem_.init(cfg_.base_width, cfg_.input_channels, 7, 2, init_rng);

    int in_c = cfg_.base_width;
    stages_.resize(cfg_.stage_blocks.size());
    for (size_t s = 0; s < cfg_.stage_blocks.size(); ++s) {
        const int width = cfg_.base_width << s;
        stages_[s].resize(cfg_.stage_blocks[s]);
        for (int b = 0; b < cfg_.stage_blocks[s]; ++b) {
            const int stride = (s > 0 && b == 0) ? 2 : 1;
            stages_[s][b].init(cfg_.block, in_c, width, stride, init_rng);
            in_c = stages_[s][b].out_channels(width);
        }
    }
    fc_w_ = Tensor4<T>(cfg_.num_classes, in_c, 1, 1);
    fc_dw_ = Tensor4<T>(cfg_.num_classes, in_c, 1, 1);
    fc_b_ = Tensor4<T>(1, cfg_.num_classes, 1, 1);
    fc_db_ = Tensor4<T>(1, cfg_.num_classes, 1, 1);
    he_init(fc_w_, in_c, init_rng);
}

template <typename T>
Tensor4<T> ResNet<T>::forward(const Tensor4<T>& x, bool training, Rng* dropout_rng) {
    if (x.c != cfg_.input_channels)
        fail("forward: expected " + std::to_string(cfg_.input_channels) + " input channels, got " +
             std::to_string(x.c));
    Tensor4<T> t = relu_forward(stem_.forward(x, training));
    if (training) stem_relu_out_ = t;
    t = maxpool_forward(t, 3, 2, 1, training ? &pool_cache_ : nullptr);
    if (training) pool_out_ = t;
    for (auto& stage : stages_)
        for (auto& block : stage) t = block.forward(t, training);
    gap_h_ = t.h;
    gap_w_ = t.w;
    if (training) gap_in_ = t;
    t = global_avg_pool_forward(t);
    if (training) gap_out_ = t;
    if (training && dropout_p_ > 0.f && !dropout_rng)
        fail("forward: dropout requires an RNG in training mode");
    static Rng unused_rng(0);
    t = dropout_forward(t, static_cast<T>(dropout_p_), training,
                        dropout_rng ? *dropout_rng : unused_rng, training ? &drop_cache_ : nullptr);
    if (training) drop_out_ = t;
    return linear_forward(t, fc_w_, fc_b_);
}

template <typename T>
void ResNet<T>::backward(const Tensor4<T>& dlogits) {
    LinearGrads<T> lg = linear_backward(drop_out_, fc_w_, dlogits);
    for (size_t i = 0; i < fc_w_.size(); ++i) fc_dw_.data[i] += lg.dw.data[i];
    for (size_t i = 0; i < fc_b_.size(); ++i) fc_db_.data[i] += lg.db.data[i];
    Tensor4<T> d = dropout_backward(lg.dx, drop_cache_);
    d = global_avg_pool_backward(d, gap_h_, gap_w_);
    for (auto s = stages_.rbegin(); s != stages_.rend(); ++s)
        for (auto b = s->rbegin(); b != s->rend(); ++b) d = b->backward(d);
    d = maxpool_backward(d, pool_cache_, pool_out_.c);
    d = relu_backward(stem_relu_out_, d);
    stem_.backward(d, false);  // input gradient not needed at the first layer
}

template <typename T>
std::vector<TensorView<T>> ResNet<T>::param_views() {
    std::vector<TensorView<T>> all = state_views();
    std::vector<TensorView<T>> out;
    for (auto& v : all)
        if (v.grad) out.push_back(v);
    return out;
}

template <typename T>
std::vector<TensorView<T>> ResNet<T>::state_views() {
    std::vector<TensorView<T>> out;
    stem_.collect("stem", out);
    for (size_t s = 0; s < stages_.size(); ++s)
        for (size_t b = 0; b < stages_[s].size(); ++b)
            stages_[s][b].collect("stage" + std::to_string(s) + ".block" + std::to_string(b), out);
    out.push_back(view_of("fc.w", fc_w_, &fc_dw_));
    out.push_back(view_of("fc.b", fc_b_, &fc_db_));
    return out;
}

template <typename T>
void ResNet<T>::zero_grads() {
    for (auto& v : param_views()) std::fill(v.grad, v.grad + v.size(), T(0));
}

template <typename T>
size_t ResNet<T>::param_count() {
    size_t n = 0;
    for (auto& v : param_views()) n += v.size();
    return n;
}

template <typename T>
void ResNet<T>::set_stem_kernel(const Tensor4<T>& w) {
    if (!w.same_shape(stem_.w))
        fail("set_stem_kernel: expected shape " + stem_.w.shape_str() + ", got " + w.shape_str());
    stem_.w = w;
}

template struct ConvBn<float>;
template struct ConvBn<double>;
template struct ResidualBlock<float>;
template struct ResidualBlock<double>;
template class ResNet<float>;
template class ResNet<double>;

}  // namespace flowgest::net
