#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "flowgest/error.hpp"
#include "flowgest/image_io.hpp"
#include "flowgest/run/run.hpp"

namespace flowgest::run {

namespace fs = std::filesystem;

namespace {

// `<Task>_<Subject><Trial digits>.txt`, e.g. Suturing_B001.txt
bool parse_transcript_name(const std::string& stem, std::string& task, std::string& subject,
                           int& trial) {
    const size_t us = stem.rfind('_');
    if (us == std::string::npos || us == 0 || us + 1 >= stem.size()) return false;
    task = stem.substr(0, us);
    const std::string rest = stem.substr(us + 1);
    size_t d = 0;
    while (d < rest.size() && !std::isdigit(static_cast<unsigned char>(rest[d]))) ++d;
    if (d == 0 || d == rest.size()) return false;
    subject = rest.substr(0, d);
    try {
        trial = std::stoi(rest.substr(d));
    } catch (const std::exception&) {
        return false;
    }
    return trial >= 1;
}

std::string frame_file(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.png", index);
    return buf;
}

Image8 read_source_frame(const fs::path& trial_dir, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d", index);
    for (const char* ext : {".png", ".jpg", ".jpeg"}) {
        const fs::path p = trial_dir / (std::string(buf) + ext);
        if (fs::exists(p)) return read_image(p.string());
    }
    fail("missing source frame " + std::string(buf) + "[.png|.jpg] in '" + trial_dir.string() +
         "'");
}

}  // namespace

void preprocess_corpus(const std::string& frames_dir, const std::string& transcripts_dir,
                       const std::string& out_dir, std::ostream* progress) {
    if (!fs::is_directory(frames_dir)) fail("frames directory '" + frames_dir + "' does not exist");
    if (!fs::is_directory(transcripts_dir))
        fail("transcripts directory '" + transcripts_dir + "' does not exist");

    std::vector<fs::path> transcripts;
    for (const auto& e : fs::directory_iterator(transcripts_dir))
        if (e.is_regular_file() && e.path().extension() == ".txt") transcripts.push_back(e.path());
    std::sort(transcripts.begin(), transcripts.end());
    if (transcripts.empty()) fail("no .txt transcripts in '" + transcripts_dir + "'");

    fs::create_directories(out_dir);
    std::vector<ingest::ManifestRow> rows;
    for (const auto& tpath : transcripts) {
        std::string task, subject;
        int trial = 0;
        if (!parse_transcript_name(tpath.stem().string(), task, subject, trial)) {
            fail("transcript name '" + tpath.filename().string() +
                 "' does not match <Task>_<Subject><Trial>.txt");
        }
        std::ifstream in(tpath);
        std::stringstream buf;
        buf << in.rdbuf();
        const auto segments = ingest::parse_transcript(buf.str(), task, subject, trial);
        const fs::path trial_dir = fs::path(frames_dir) / tpath.stem();

        for (const auto& seg : segments) {
            const ingest::ClipMeta meta = ingest::plan_clip(seg);
            const ingest::ManifestRow row = ingest::manifest_row(meta);
            rows.push_back(row);
            if (meta.status == ingest::ClipStatus::Excluded) {
                if (progress)
                    (*progress) << "excluded " << ingest::clip_dir_name(row) << " ("
                                << meta.frame_count << " frames)\n";
                continue;
            }
            std::vector<Image8> frames;
            frames.reserve(seg.duration_frames());
            for (int fidx = seg.start_frame; fidx <= seg.end_frame; ++fidx)
                frames.push_back(read_source_frame(trial_dir, fidx));
            frames = ingest::resample_frames(frames, meta.sample_rate_hz);

            const fs::path clip_dir = fs::path(out_dir) / ingest::clip_dir_name(row);
            fs::create_directories(clip_dir);
            for (size_t k = 0; k < frames.size(); ++k) {
                write_png(ingest::resize_frame(frames[k]),
                          (clip_dir / frame_file(static_cast<int>(k) + 1)).string());
            }
            if (progress)
                (*progress) << ingest::clip_dir_name(row) << ": " << frames.size() << " frames @"
                            << meta.sample_rate_hz << " Hz\n";
        }
    }
    ingest::write_manifest((fs::path(out_dir) / "manifest.csv").string(), rows);
}

}  // namespace flowgest::run
