#pragma once

#include <string>
#include <vector>

#include "flowgest/ingest.hpp"

namespace flowgest::eval {

// Indices into the source manifest (Kept rows only). Fold i tests on
// supertrial i; validation is one seeded-random other trial across all
// subjects, so no trial appears in both train and validation.
struct FoldSpec {
    int fold_index = 1;       // trial index under test
    int validation_trial = 0;
    std::vector<int> train, validation, test;
};

std::vector<FoldSpec> build_loso_folds(const std::vector<ingest::ManifestRow>& manifest,
                                       uint64_t seed);

// Mean of the chunk probability vectors, argmax, ties to the lowest class
// id. Returns a 0-based class index.
int vote(const std::vector<std::vector<float>>& chunk_probs);

struct TaskReport {
    std::string method = "flowgest";
    std::string task;
    std::vector<double> fold_acc;  // percent, one per fold
    double mean = 0;
    double stddev = 0;  // population std over the folds
};

TaskReport aggregate(const std::string& task, const std::vector<double>& fold_accuracies,
                     const std::string& method = "flowgest");

// Published LOSO baseline of the flow-only BN-ResNet101, for side-by-side
// tables: Suturing 91.07 +/- 0.67, Needle Passing 74.25 +/- 3.66,
// Knot Tying 87.78 +/- 3.44.
std::vector<TaskReport> published_baseline();

// Aligned table with columns Method, Evaluation, Suturing, Needle Passing,
// Knot Tying; additional tasks get extra columns, absent cells print an
// em-dash placeholder.
std::string emit_report_text(const std::vector<TaskReport>& reports);

std::string emit_report_csv(const std::vector<TaskReport>& reports);
std::vector<TaskReport> parse_report_csv(const std::string& text);

}  // namespace flowgest::eval
