#pragma once

#include <map>
#include <string>
#include <vector>

#include "flowgest/encode.hpp"
#include "flowgest/eval.hpp"
#include "flowgest/flow.hpp"
#include "flowgest/net/train.hpp"
#include "flowgest/pipeline.hpp"

namespace flowgest::run {

// In-memory cache of stored flow planes, keyed by manifest row index.
// Loading is on demand and parallel; lookups after load_all are read-only
// and safe to share across threads.
class PlaneStore {
public:
    PlaneStore(std::string flow_dir, std::vector<ingest::ManifestRow> manifest,
               encode::PlaneFormat format = encode::PlaneFormat::Png);

    const std::vector<ingest::ManifestRow>& manifest() const { return manifest_; }
    // load every Kept clip's planes into memory
    void load_all();
    const pipeline::ClipPlanes& planes(int row_index) const;

    net::ChunkLoader chunk_loader() const;

private:
    std::string flow_dir_;
    std::vector<ingest::ManifestRow> manifest_;
    encode::PlaneFormat format_;
    std::vector<pipeline::ClipPlanes> cache_;
    std::vector<bool> loaded_;
};

struct FlowOptions {
    flow::FarnebackParams params;
    encode::PlaneFormat format = encode::PlaneFormat::Png;
    float mag_cap = encode::kDefaultMagCap;
    int jpeg_quality = 90;
    bool dump_raw = false;  // additionally write raw float fields
};

// frames under in_dir/<clip>/frame_%06d.png -> mag/dir planes under
// out_dir/<clip>/, plus a copy of the manifest. Parallel across clips.
void compute_flow_corpus(const std::string& in_dir, const std::string& out_dir,
                         const FlowOptions& options, std::ostream* progress = nullptr);

struct TrainOptions {
    net::NetConfig net;
    net::TrainConfig train;
    std::string first_layer_init;   // optional tensor file for the stem kernel
    std::vector<int> folds;         // empty = all folds
    std::string task;               // empty = require a single-task manifest
};

// Trains one checkpoint per requested fold into out_dir/fold_<i>/.
void train_folds(const std::string& flow_dir, const std::string& out_dir,
                 const TrainOptions& options, std::ostream* progress = nullptr);

struct EvaluateOptions {
    uint64_t seed = 7;
    std::vector<int> folds;  // empty = all folds
    std::string task;
    std::string method = "flowgest";
};

// 20-chunk voting over each fold's test split; plane files live next to
// the manifest. Returns the aggregated report and writes report.txt /
// report.csv when out_dir is non-empty.
eval::TaskReport evaluate_folds(const std::string& manifest_path,
                                const std::string& checkpoints_dir, const std::string& out_dir,
                                const EvaluateOptions& options, std::ostream* progress = nullptr);

// JIGSAWS-style preprocessing: transcripts + per-trial frame directories ->
// per-clip frame directories + manifest.csv.
void preprocess_corpus(const std::string& frames_dir, const std::string& transcripts_dir,
                       const std::string& out_dir, std::ostream* progress = nullptr);

// filter manifest rows by task; empty task requires exactly one task present
std::vector<int> select_task_rows(const std::vector<ingest::ManifestRow>& manifest,
                                  std::string& task);

}  // namespace flowgest::run
