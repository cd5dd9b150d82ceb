#include <filesystem>

#include "flowgest/error.hpp"
#include "flowgest/run/run.hpp"

namespace flowgest::run {

namespace fs = std::filesystem;

PlaneStore::PlaneStore(std::string flow_dir, std::vector<ingest::ManifestRow> manifest,
                       encode::PlaneFormat format)
    : flow_dir_(std::move(flow_dir)),
      manifest_(std::move(manifest)),
      format_(format),
      cache_(manifest_.size()),
      loaded_(manifest_.size(), false) {}

void PlaneStore::load_all() {
    // exceptions must not unwind out of the parallel region
    std::string first_error;
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(manifest_.size()); ++i) {
        const auto& row = manifest_[i];
        if (row.status != ingest::ClipStatus::Kept || loaded_[i]) continue;
        try {
            const fs::path dir = fs::path(flow_dir_) / ingest::clip_dir_name(row);
            pipeline::ClipPlanes planes;
            planes.mag.reserve(row.pairs());
            planes.dir.reserve(row.pairs());
            for (int p = 0; p < row.pairs(); ++p) {
                planes.mag.push_back(encode::read_plane(
                    (dir / encode::plane_file_name(encode::PlaneKind::Magnitude, p + 1, format_))
                        .string(),
                    encode::PlaneKind::Magnitude));
                planes.dir.push_back(encode::read_plane(
                    (dir / encode::plane_file_name(encode::PlaneKind::Direction, p + 1, format_))
                        .string(),
                    encode::PlaneKind::Direction));
            }
            cache_[i] = std::move(planes);
            loaded_[i] = true;
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) fail(first_error);
}

const pipeline::ClipPlanes& PlaneStore::planes(int row_index) const {
    if (row_index < 0 || row_index >= static_cast<int>(cache_.size()))
        fail("PlaneStore: row index out of range");
    if (!loaded_[row_index])
        fail("PlaneStore: planes for clip '" + ingest::clip_dir_name(manifest_[row_index]) +
             "' not loaded");
    return cache_[row_index];
}

net::ChunkLoader PlaneStore::chunk_loader() const {
    return [this](const std::vector<net::ChunkRequest>& reqs, net::TensorF& batch) {
        if (batch.n != static_cast<int>(reqs.size())) fail("chunk_loader: batch size mismatch");
        std::string first_error;
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < static_cast<int64_t>(reqs.size()); ++i) {
            try {
                const auto& r = reqs[i];
                const pipeline::FlowStack stack =
                    pipeline::build_stack(planes(r.clip), r.start,
                                          ingest::clip_dir_name(manifest_[r.clip]));
                const pipeline::FlowChunk chunk = pipeline::crop_stack(stack, r.crop, r.flip);
                std::copy(chunk.data.begin(), chunk.data.end(),
                          batch.sample(static_cast<int>(i)));
            } catch (const std::exception& e) {
#pragma omp critical
                if (first_error.empty()) first_error = e.what();
            }
        }
        if (!first_error.empty()) fail(first_error);
    };
}

}  // namespace flowgest::run
