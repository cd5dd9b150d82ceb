#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "flowgest/error.hpp"
#include "flowgest/net/checkpoint.hpp"
#include "flowgest/run/run.hpp"

namespace flowgest::run {

namespace fs = std::filesystem;

eval::TaskReport evaluate_folds(const std::string& manifest_path,
                                const std::string& checkpoints_dir, const std::string& out_dir,
                                const EvaluateOptions& options, std::ostream* progress) {
    auto manifest = ingest::read_manifest(manifest_path);
    const std::string flow_dir = fs::path(manifest_path).parent_path().string();
    std::string task = options.task;
    const std::vector<int> task_rows = select_task_rows(manifest, task);
    std::vector<ingest::ManifestRow> task_manifest;
    for (int r : task_rows) task_manifest.push_back(manifest[r]);
    const auto folds = eval::build_loso_folds(task_manifest, options.seed);

    PlaneStore store(flow_dir, task_manifest);
    store.load_all();
    const net::ChunkLoader loader = store.chunk_loader();

    std::vector<double> accuracies;
    for (const auto& fold : folds) {
        if (!options.folds.empty() &&
            std::find(options.folds.begin(), options.folds.end(), fold.fold_index) ==
                options.folds.end())
            continue;
        if (fold.test.empty()) fail("fold " + std::to_string(fold.fold_index) + ": empty test split");
        const fs::path ckpt = fs::path(checkpoints_dir) /
                              ("fold_" + std::to_string(fold.fold_index)) / "checkpoint.bin";
        net::ResNetF model = net::load_checkpoint(ckpt.string());

        int correct = 0;
        for (int row : fold.test) {
            const auto& clip = task_manifest[row];
            const auto starts = pipeline::sample_test_chunks(clip.pairs());
            std::vector<net::ChunkRequest> reqs(starts.size());
            for (size_t k = 0; k < starts.size(); ++k) {
                reqs[k].clip = row;
                reqs[k].start = starts[k];
                reqs[k].crop = pipeline::center_crop();
                reqs[k].flip = false;
            }
            net::TensorF batch(static_cast<int>(reqs.size()), pipeline::kStackChannels,
                               pipeline::kCropSize, pipeline::kCropSize);
            loader(reqs, batch);
            const auto probs = net::predict_chunks(model, batch);
            if (eval::vote(probs) == clip.label - 1) ++correct;
        }
        const double acc = 100.0 * correct / fold.test.size();
        accuracies.push_back(acc);
        if (progress)
            (*progress) << "fold " << fold.fold_index << ": " << correct << "/" << fold.test.size()
                        << " clips correct (" << acc << "%)\n";
    }

    eval::TaskReport report = eval::aggregate(task, accuracies, options.method);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream txt((fs::path(out_dir) / "report.txt").string());
        txt << eval::emit_report_text({report});
        std::ofstream csv((fs::path(out_dir) / "report.csv").string());
        csv << eval::emit_report_csv({report});
        if (!txt.flush() || !csv.flush()) fail("cannot write report to '" + out_dir + "'");
    }
    return report;
}

}  // namespace flowgest::run
