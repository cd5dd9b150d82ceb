#include <cstdio>
#include <filesystem>
#include <ostream>

#include "flowgest/error.hpp"
#include "flowgest/image_io.hpp"
#include "flowgest/run/run.hpp"

namespace flowgest::run {

namespace fs = std::filesystem;

namespace {

std::string frame_file(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.png", index);
    return buf;
}

}  // namespace

void compute_flow_corpus(const std::string& in_dir, const std::string& out_dir,
                         const FlowOptions& options, std::ostream* progress) {
    options.params.validate();
    if (!fs::is_directory(in_dir)) fail("flow: input directory '" + in_dir + "' does not exist");
    const auto manifest = ingest::read_manifest((fs::path(in_dir) / "manifest.csv").string());
    fs::create_directories(out_dir);
    ingest::write_manifest((fs::path(out_dir) / "manifest.csv").string(), manifest);

    // clips are independent; pairs within a clip reuse the previous frame
    std::string first_error;
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(manifest.size()); ++i) {
        const auto& row = manifest[i];
        if (row.status != ingest::ClipStatus::Kept) continue;
        try {
        const std::string clip = ingest::clip_dir_name(row);
        const fs::path src = fs::path(in_dir) / clip;
        const fs::path dst = fs::path(out_dir) / clip;
        fs::create_directories(dst);

        PlaneF prev = to_gray(read_image((src / frame_file(1)).string()));
        for (int p = 0; p < row.pairs(); ++p) {
            PlaneF next = to_gray(read_image((src / frame_file(p + 2)).string()));
            const flow::FlowField field = flow::estimate_flow(prev, next, options.params);
            const encode::PolarFlow polar = encode::flow_to_polar(field);
            auto [mag, dir] = encode::quantize(polar, options.mag_cap);
            encode::write_plane(
                mag, options.format,
                (dst / encode::plane_file_name(encode::PlaneKind::Magnitude, p + 1, options.format))
                    .string(),
                options.jpeg_quality);
            encode::write_plane(
                dir, options.format,
                (dst / encode::plane_file_name(encode::PlaneKind::Direction, p + 1, options.format))
                    .string(),
                options.jpeg_quality);
            if (options.dump_raw) {
                char raw[32];
                std::snprintf(raw, sizeof(raw), "flow_%04d.bin", p + 1);
                flow::write_flow_raw(field, (dst / raw).string());
            }
            prev = std::move(next);
        }
        if (progress) {
#pragma omp critical
            (*progress) << "flow: " << clip << " (" << row.pairs() << " pairs)\n";
        }
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) fail(first_error);
}

}  // namespace flowgest::run
