#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "flowgest/error.hpp"
#include "flowgest/net/checkpoint.hpp"
#include "flowgest/net/init.hpp"
#include "flowgest/run/run.hpp"

namespace flowgest::run {

namespace fs = std::filesystem;

std::vector<int> select_task_rows(const std::vector<ingest::ManifestRow>& manifest,
                                  std::string& task) {
    std::set<std::string> tasks;
    for (const auto& r : manifest)
        if (r.status == ingest::ClipStatus::Kept) tasks.insert(r.task);
    if (tasks.empty()) fail("manifest has no kept clips");
    if (task.empty()) {
        if (tasks.size() > 1)
            fail("manifest contains " + std::to_string(tasks.size()) +
                 " tasks; pick one with --task");
        task = *tasks.begin();
    } else if (!tasks.count(task)) {
        fail("task '" + task + "' not present in manifest");
    }
    std::vector<int> rows;
    for (size_t i = 0; i < manifest.size(); ++i)
        if (manifest[i].status == ingest::ClipStatus::Kept && manifest[i].task == task)
            rows.push_back(static_cast<int>(i));
    return rows;
}

namespace {

// map manifest labels (1-based gesture ids) onto dense 0-based classes
std::vector<net::ClipRef> to_clip_refs(const std::vector<ingest::ManifestRow>& manifest,
                                       const std::vector<int>& rows) {
    std::vector<net::ClipRef> refs;
    refs.reserve(rows.size());
    for (int r : rows) {
        net::ClipRef ref;
        ref.clip = r;
        ref.label = manifest[r].label - 1;
        ref.pairs = manifest[r].pairs();
        refs.push_back(ref);
    }
    return refs;
}

}  // namespace

void train_folds(const std::string& flow_dir, const std::string& out_dir,
                 const TrainOptions& options, std::ostream* progress) {
    options.net.validate();
    options.train.validate();
    auto manifest = ingest::read_manifest((fs::path(flow_dir) / "manifest.csv").string());
    std::string task = options.task;
    const std::vector<int> task_rows = select_task_rows(manifest, task);

    std::vector<ingest::ManifestRow> task_manifest;
    for (int r : task_rows) task_manifest.push_back(manifest[r]);
    const auto folds = eval::build_loso_folds(task_manifest, options.train.seed);

    PlaneStore store(flow_dir, task_manifest);
    store.load_all();
    const net::ChunkLoader loader = store.chunk_loader();

    net::TensorF stem_kernel;
    if (!options.first_layer_init.empty()) {
        stem_kernel = net::read_tensor(options.first_layer_init);
        if (stem_kernel.c != options.net.input_channels)
            fail("first-layer init has " + std::to_string(stem_kernel.c) +
                 " channels, expected " + std::to_string(options.net.input_channels) +
                 " (run init-weights first)");
    }

    fs::create_directories(out_dir);
    for (const auto& fold : folds) {
        if (!options.folds.empty() &&
            std::find(options.folds.begin(), options.folds.end(), fold.fold_index) ==
                options.folds.end())
            continue;
        if (progress)
            (*progress) << "fold " << fold.fold_index << ": train " << fold.train.size()
                        << " val " << fold.validation.size() << " test " << fold.test.size()
                        << " clips\n";
        // fresh seeded model per fold; the fold index keeps streams distinct
        Rng init_rng(options.train.seed * 1315423911ULL + fold.fold_index);
        net::ResNetF model(options.net, init_rng);
        if (stem_kernel.size() > 0) model.set_stem_kernel(stem_kernel);

        net::TrainResult result =
            net::train(model, to_clip_refs(task_manifest, fold.train),
                       to_clip_refs(task_manifest, fold.validation), options.train, loader,
                       progress);

        const fs::path fold_dir = fs::path(out_dir) / ("fold_" + std::to_string(fold.fold_index));
        fs::create_directories(fold_dir);
        net::save_checkpoint(model, (fold_dir / "checkpoint.bin").string());
        std::ofstream log((fold_dir / "train_log.csv").string());
        log << net::format_train_log_csv(result.log);
        if (!log.flush()) fail("cannot write training log in '" + fold_dir.string() + "'");
        if (progress)
            (*progress) << "fold " << fold.fold_index << ": best epoch " << result.best_epoch
                        << " (val " << result.best_val_acc << "%)\n";
    }
}

}  // namespace flowgest::run
