#include "flowgest/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flowgest/error.hpp"

namespace flowgest::ingest {

const char* gesture_description(int id) {
    static const char* kDescriptions[kNumGestures] = {
        "Reaching for needle with right hand",
        "Positioning needle",
        "Pushing needle through tissue",
        "Transferring needle from left to right",
        "Moving to center with needle in grip",
        "Pulling suture with left hand",
        "Pulling suture with right hand",
        "Orienting needle",
        "Using right hand to help tighten suture",
        "Loosening more suture",
        "Dropping suture at end and moving to end points",
        "Positioning needle",
        "Making C loop around right hand",
        "Reaching for suture with right hand",
        "Pulling suture with both hands",
    };
    if (id < 1 || id > kNumGestures) fail("gesture id out of range: " + std::to_string(id));
    return kDescriptions[id - 1];
}

std::vector<GestureSegment> parse_transcript(const std::string& text,
                                             const std::string& task,
                                             const std::string& subject, int trial) {
    std::vector<GestureSegment> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string a, b, tok, extra;
        if (!(ls >> a)) continue;  // blank line
        if (!(ls >> b >> tok) || (ls >> extra)) {
            fail("transcript line " + std::to_string(lineno) +
                 ": expected `start end G<k>`, got '" + line + "'");
        }
        GestureSegment seg;
        seg.task = task;
        seg.subject = subject;
        seg.trial = trial;
        try {
            seg.start_frame = std::stoi(a);
            seg.end_frame = std::stoi(b);
        } catch (const std::exception&) {
            fail("transcript line " + std::to_string(lineno) + ": bad frame number in '" + line + "'");
        }
        if (tok.size() < 2 || tok[0] != 'G')
            fail("transcript line " + std::to_string(lineno) + ": bad label token '" + tok + "'");
        int id = 0;
        try {
            id = std::stoi(tok.substr(1));
        } catch (const std::exception&) {
            fail("transcript line " + std::to_string(lineno) + ": bad label token '" + tok + "'");
        }
        if (id < 1 || id > kNumGestures)
            fail("transcript line " + std::to_string(lineno) + ": unknown label '" + tok + "'");
        seg.label = id;
        if (seg.start_frame < 1 || seg.end_frame < seg.start_frame)
            fail("transcript line " + std::to_string(lineno) + ": invalid frame range " +
                 std::to_string(seg.start_frame) + ".." + std::to_string(seg.end_frame));
        out.push_back(seg);
    }
    std::sort(out.begin(), out.end(),
              [](const GestureSegment& l, const GestureSegment& r) {
                  return l.start_frame < r.start_frame;
              });
    for (size_t i = 1; i < out.size(); ++i) {
        if (out[i].start_frame <= out[i - 1].end_frame)
            fail("overlapping segments: [" + std::to_string(out[i - 1].start_frame) + "," +
                 std::to_string(out[i - 1].end_frame) + "] and [" +
                 std::to_string(out[i].start_frame) + "," + std::to_string(out[i].end_frame) + "]");
    }
    return out;
}

std::string serialize_transcript(const std::vector<GestureSegment>& segments) {
    std::string out;
    for (const auto& s : segments) {
        out += std::to_string(s.start_frame) + " " + std::to_string(s.end_frame) +
               " G" + std::to_string(s.label) + "\n";
    }
    return out;
}

ClipMeta plan_clip(const GestureSegment& segment, int source_rate_hz) {
    if (source_rate_hz != 30) fail("plan_clip: source material must be 30 Hz");
    if (segment.end_frame < segment.start_frame) fail("plan_clip: invalid segment range");
    ClipMeta meta;
    meta.segment = segment;
    const int duration = segment.duration_frames();
    if (duration < 30) {
        meta.sample_rate_hz = 40;
        meta.frame_count = static_cast<int>(std::lround(duration * 40.0 / 30.0));
    } else {
        meta.sample_rate_hz = 30;
        meta.frame_count = duration;
    }
    meta.status = meta.frame_count < 15 ? ClipStatus::Excluded : ClipStatus::Kept;
    return meta;
}

std::vector<int> resample_indices(int n, int source_rate_hz, int target_rate_hz) {
    if (n <= 0) fail("resample_indices: empty input");
    if (source_rate_hz <= 0 || target_rate_hz <= 0) fail("resample_indices: bad rates");
    const int out_n = static_cast<int>(
        std::lround(static_cast<double>(n) * target_rate_hz / source_rate_hz));
    std::vector<int> idx(out_n);
    for (int k = 0; k < out_n; ++k) {
        int src = static_cast<int>((static_cast<int64_t>(k) * source_rate_hz) / target_rate_hz);
        idx[k] = std::min(src, n - 1);
    }
    return idx;
}

std::vector<Image8> resample_frames(const std::vector<Image8>& frames, int target_rate_hz) {
    if (frames.empty()) fail("resample_frames: empty input");
    if (target_rate_hz != 30 && target_rate_hz != 40)
        fail("resample_frames: target rate must be 30 or 40 Hz");
    if (target_rate_hz == 30) return frames;
    std::vector<int> idx = resample_indices(static_cast<int>(frames.size()), 30, target_rate_hz);
    std::vector<Image8> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(frames[i]);
    return out;
}

Image8 resize_frame(const Image8& image, int width, int height) {
    return resize_bilinear(image, width, height);
}

ManifestRow manifest_row(const ClipMeta& meta) {
    ManifestRow r;
    r.task = meta.segment.task;
    r.subject = meta.segment.subject;
    r.trial = meta.segment.trial;
    r.start = meta.segment.start_frame;
    r.end = meta.segment.end_frame;
    r.label = meta.segment.label;
    r.rate = meta.sample_rate_hz;
    r.frames = meta.frame_count;
    r.status = meta.status;
    return r;
}

std::string clip_dir_name(const ManifestRow& row) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "_T%d_%06d_%06d_G%02d", row.trial, row.start, row.end, row.label);
    return row.task + "_" + row.subject + buf;
}

namespace {

const char* kManifestHeader = "task,subject,trial,start,end,label,rate,frames,status";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
    std::ofstream out(path);
    if (!out) fail("cannot write manifest '" + path + "'");
    out << kManifestHeader << "\n";
    for (const auto& r : rows) {
        out << r.task << ',' << r.subject << ',' << r.trial << ',' << r.start << ',' << r.end
            << ',' << r.label << ',' << r.rate << ',' << r.frames << ','
            << (r.status == ClipStatus::Kept ? "Kept" : "Excluded") << "\n";
    }
    if (!out.flush()) fail("manifest write failed for '" + path + "'");
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open manifest '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) fail("empty manifest '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader)
        fail("manifest '" + path + "': unexpected header '" + line + "'");
    std::vector<ManifestRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv(line);
        if (f.size() != 9)
            fail("manifest '" + path + "' line " + std::to_string(lineno) + ": expected 9 fields");
        ManifestRow r;
        try {
            r.task = f[0];
            r.subject = f[1];
            r.trial = std::stoi(f[2]);
            r.start = std::stoi(f[3]);
            r.end = std::stoi(f[4]);
            r.label = std::stoi(f[5]);
            r.rate = std::stoi(f[6]);
            r.frames = std::stoi(f[7]);
        } catch (const std::exception&) {
            fail("manifest '" + path + "' line " + std::to_string(lineno) + ": bad number");
        }
        if (f[8] == "Kept")
            r.status = ClipStatus::Kept;
        else if (f[8] == "Excluded")
            r.status = ClipStatus::Excluded;
        else
            fail("manifest '" + path + "' line " + std::to_string(lineno) + ": bad status '" + f[8] + "'");
        rows.push_back(r);
    }
    return rows;
}

}  // namespace flowgest::ingest
