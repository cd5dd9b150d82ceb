#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flowgest/net/model.hpp"
#include "flowgest/pipeline.hpp"

namespace flowgest::net {

struct TrainConfig {
    double lr_base = 1e-3;
    int step_size = 10;   // epochs per learning-rate step
    double gamma = 0.25;  // step decay factor
    int batch_size = 30;
    int max_epochs = 300;
    double momentum = 0.9;
    double weight_decay = 0.0;
    uint64_t seed = 7;
    int crops_per_clip = 5;  // random crops emitted per sampled stack
    bool flip_augment = false;

    void validate() const;
};

// lr = lr_base * gamma^floor(epoch / step_size)
double lr_at(int epoch, const TrainConfig& cfg);

// Classical momentum: v <- mu v + g; p <- p - lr v. Throws on non-finite
// gradients so a diverging run halts with a diagnostic.
template <typename T>
class SgdOptimizer {
public:
    SgdOptimizer(double momentum, double weight_decay) : mu_(momentum), wd_(weight_decay) {}
    void step(std::vector<TensorView<T>>& params, double lr);

private:
    double mu_, wd_;
    std::vector<std::vector<T>> velocity_;
};

struct ClipRef {
    int clip = 0;      // caller-side clip handle
    int label = 0;     // 0-based class index
    int pairs = 0;     // available flow pairs
};

struct ChunkRequest {
    int clip = 0;
    int start = 0;
    pipeline::CropSpec crop;
    bool flip = false;
};

// Materializes chunk `i` of the request list into sample `i` of the batch
// tensor [n, 20, 224, 224]. Implementations may parallelize over requests.
using ChunkLoader =
    std::function<void(const std::vector<ChunkRequest>&, Tensor4<float>& batch)>;

struct EpochLog {
    int epoch = 0;
    double lr = 0, train_loss = 0, train_acc = 0, val_loss = 0, val_acc = 0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    int best_epoch = -1;
    double best_val_acc = 0;
    // model state of the best validation epoch, by tensor name
    std::vector<std::pair<std::string, std::vector<float>>> best_state;
};

// Epoch loop: per train clip one sampled stack, crops_per_clip crops; one
// deterministic center chunk per validation clip. The best-validation
// snapshot is restored into the model before returning.
TrainResult train(ResNetF& model, const std::vector<ClipRef>& train_clips,
                  const std::vector<ClipRef>& val_clips, const TrainConfig& cfg,
                  const ChunkLoader& loader, std::ostream* progress = nullptr);

std::string format_train_log_csv(const std::vector<EpochLog>& log);

// probabilities over classes for a batch of chunks, rows sum to 1
std::vector<std::vector<float>> predict_chunks(ResNetF& model, const Tensor4<float>& chunks);

}  // namespace flowgest::net
