#include "flowgest/net/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <sstream>

namespace flowgest::net {

void TrainConfig::validate() const {
    if (lr_base <= 0) fail("TrainConfig: lr_base must be positive");
    if (step_size < 1) fail("TrainConfig: step_size must be >= 1");
    if (!(gamma > 0 && gamma < 1)) fail("TrainConfig: gamma must be in (0, 1)");
    if (batch_size < 1) fail("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) fail("TrainConfig: max_epochs must be >= 1");
    if (momentum < 0 || momentum >= 1) fail("TrainConfig: momentum must be in [0, 1)");
    if (weight_decay < 0) fail("TrainConfig: weight_decay must be >= 0");
    if (crops_per_clip < 1) fail("TrainConfig: crops_per_clip must be >= 1");
}

double lr_at(int epoch, const TrainConfig& cfg) {
    if (epoch < 0) fail("lr_at: epoch must be >= 0");
    return cfg.lr_base * std::pow(cfg.gamma, epoch / cfg.step_size);
}

template <typename T>
void SgdOptimizer<T>::step(std::vector<TensorView<T>>& params, double lr) {
    if (velocity_.empty()) {
        velocity_.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) velocity_[i].assign(params[i].size(), T(0));
    }
    if (velocity_.size() != params.size()) fail("SgdOptimizer: parameter set changed");
    for (size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        auto& v = velocity_[i];
        const T mu = static_cast<T>(mu_);
        const T wd = static_cast<T>(wd_);
        const T flr = static_cast<T>(lr);
        const int64_t n = static_cast<int64_t>(p.size());
        bool finite = true;
#pragma omp parallel for schedule(static) reduction(&& : finite)
        for (int64_t k = 0; k < n; ++k) finite = finite && std::isfinite(p.grad[k]);
        if (!finite) fail("sgd_step: non-finite gradient in '" + params[i].name + "'");
#pragma omp parallel for schedule(static)
        for (int64_t k = 0; k < n; ++k) {
            T g = p.grad[k];
            if (wd != T(0)) g += wd * p.data[k];
            v[k] = mu * v[k] + g;
            p.data[k] -= flr * v[k];
        }
    }
}

template class SgdOptimizer<float>;
template class SgdOptimizer<double>;

namespace {

struct EvalStats {
    double loss = 0;
    double acc = 0;
};

// one deterministic center chunk per clip
EvalStats evaluate_clips(ResNetF& model, const std::vector<ClipRef>& clips, int batch_size,
                         const ChunkLoader& loader) {
    EvalStats stats;
    if (clips.empty()) return stats;
    size_t done = 0;
    double loss_sum = 0;
    int correct = 0;
    while (done < clips.size()) {
        const size_t take = std::min(static_cast<size_t>(batch_size), clips.size() - done);
        std::vector<ChunkRequest> reqs(take);
        std::vector<int> labels(take);
        for (size_t i = 0; i < take; ++i) {
            const ClipRef& c = clips[done + i];
            reqs[i].clip = c.clip;
            reqs[i].start = pipeline::sample_test_chunks(c.pairs, 1)[0];
            reqs[i].crop = pipeline::center_crop();
            reqs[i].flip = false;
            labels[i] = c.label;
        }
        Tensor4<float> batch(static_cast<int>(take), pipeline::kStackChannels,
                             pipeline::kCropSize, pipeline::kCropSize);
        loader(reqs, batch);
        Tensor4<float> logits = model.forward(batch, false);
        LossResult<float> r = softmax_cross_entropy(logits, labels);
        loss_sum += static_cast<double>(r.loss) * take;
        for (size_t i = 0; i < take; ++i)
            if (r.predictions[i] == labels[i]) ++correct;
        done += take;
    }
    stats.loss = loss_sum / clips.size();
    stats.acc = 100.0 * correct / clips.size();
    return stats;
}

}  // namespace

TrainResult train(ResNetF& model, const std::vector<ClipRef>& train_clips,
                  const std::vector<ClipRef>& val_clips, const TrainConfig& cfg,
                  const ChunkLoader& loader, std::ostream* progress) {
    cfg.validate();
    if (train_clips.empty()) fail("train: empty training split");

    Rng rng(cfg.seed);
    Rng dropout_rng(cfg.seed ^ 0x5eedd150ULL);
    SgdOptimizer<float> opt(cfg.momentum, cfg.weight_decay);
    auto params = model.param_views();

    TrainResult result;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double lr = lr_at(epoch, cfg);

        // one stack per clip, crops_per_clip crops of it
        struct Draw {
            ChunkRequest req;
            int label;
        };
        std::vector<Draw> draws;
        draws.reserve(train_clips.size() * cfg.crops_per_clip);
        for (const ClipRef& c : train_clips) {
            const int start = pipeline::sample_train_start(c.pairs, rng);
            for (int k = 0; k < cfg.crops_per_clip; ++k) {
                Draw d;
                d.req.clip = c.clip;
                d.req.start = start;
                d.req.crop = pipeline::sample_crop(rng);
                d.req.flip = cfg.flip_augment && rng.coin();
                d.label = c.label;
                draws.push_back(d);
            }
        }
        // Fisher-Yates shuffle, seeded
        for (size_t i = draws.size(); i > 1; --i)
            std::swap(draws[i - 1], draws[rng.uniform_u32(static_cast<uint32_t>(i))]);

        double loss_sum = 0;
        int correct = 0, seen = 0;
        size_t done = 0;
        while (done < draws.size()) {
            const size_t take = std::min(static_cast<size_t>(cfg.batch_size), draws.size() - done);
            std::vector<ChunkRequest> reqs(take);
            std::vector<int> labels(take);
            for (size_t i = 0; i < take; ++i) {
                reqs[i] = draws[done + i].req;
                labels[i] = draws[done + i].label;
            }
            Tensor4<float> batch(static_cast<int>(take), pipeline::kStackChannels,
                                 pipeline::kCropSize, pipeline::kCropSize);
            loader(reqs, batch);

            model.zero_grads();
            Tensor4<float> logits = model.forward(batch, true, &dropout_rng);
            LossResult<float> r = softmax_cross_entropy(logits, labels);
            if (!std::isfinite(r.loss)) fail("train: non-finite loss, halting");
            model.backward(r.dlogits);
            opt.step(params, lr);

            loss_sum += static_cast<double>(r.loss) * take;
            for (size_t i = 0; i < take; ++i)
                if (r.predictions[i] == labels[i]) ++correct;
            seen += static_cast<int>(take);
            done += take;
        }

        EvalStats val = evaluate_clips(model, val_clips, cfg.batch_size, loader);
        EpochLog log;
        log.epoch = epoch;
        log.lr = lr;
        log.train_loss = loss_sum / seen;
        log.train_acc = 100.0 * correct / seen;
        log.val_loss = val.loss;
        log.val_acc = val.acc;
        result.log.push_back(log);
        if (progress) {
            (*progress) << "epoch " << epoch << " lr " << lr << " train " << log.train_loss
                        << " / " << log.train_acc << "% val " << log.val_loss << " / "
                        << log.val_acc << "%\n";
        }

        // selection falls back to the train metric when no validation split
        const double sel_acc = val_clips.empty() ? log.train_acc : log.val_acc;
        const double sel_loss = val_clips.empty() ? log.train_loss : log.val_loss;
        const double prev_loss =
            result.best_epoch < 0
                ? 0.0
                : (val_clips.empty() ? result.log[result.best_epoch].train_loss
                                     : result.log[result.best_epoch].val_loss);
        const bool better = result.best_epoch < 0 || sel_acc > result.best_val_acc ||
                            (sel_acc == result.best_val_acc && sel_loss < prev_loss);
        if (better) {
            result.best_epoch = epoch;
            result.best_val_acc = sel_acc;
            result.best_state.clear();
            for (auto& v : model.state_views())
                result.best_state.emplace_back(v.name,
                                               std::vector<float>(v.data, v.data + v.size()));
        }
    }

    // leave the model at its best-validation state
    for (auto& v : model.state_views()) {
        for (auto& [name, data] : result.best_state) {
            if (name == v.name) {
                std::memcpy(v.data, data.data(), data.size() * sizeof(float));
                break;
            }
        }
    }
    return result;
}

std::string format_train_log_csv(const std::vector<EpochLog>& log) {
    std::ostringstream out;
    out << "epoch,lr,train_loss,train_acc,val_loss,val_acc\n";
    out.precision(10);
    for (const auto& e : log) {
        out << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.train_acc << ','
            << e.val_loss << ',' << e.val_acc << "\n";
    }
    return out.str();
}

std::vector<std::vector<float>> predict_chunks(ResNetF& model, const Tensor4<float>& chunks) {
    Tensor4<float> probs = softmax(model.forward(chunks, false));
    std::vector<std::vector<float>> out(probs.n);
    for (int i = 0; i < probs.n; ++i)
        out[i].assign(probs.sample(i), probs.sample(i) + probs.c);
    return out;
}

}  // namespace flowgest::net
