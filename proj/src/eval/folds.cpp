#include <algorithm>
#include <set>

#include "flowgest/error.hpp"
#include "flowgest/eval.hpp"
#include "flowgest/rng.hpp"

namespace flowgest::eval {

std::vector<FoldSpec> build_loso_folds(const std::vector<ingest::ManifestRow>& manifest,
                                       uint64_t seed) {
    std::set<int> trial_set;
    for (size_t i = 0; i < manifest.size(); ++i)
        if (manifest[i].status == ingest::ClipStatus::Kept) trial_set.insert(manifest[i].trial);
    if (trial_set.size() < 2)
        fail("build_loso_folds: need at least 2 distinct trial indices, found " +
             std::to_string(trial_set.size()));
    const std::vector<int> trials(trial_set.begin(), trial_set.end());

    Rng rng(seed);
    std::vector<FoldSpec> folds;
    folds.reserve(trials.size());
    for (int t : trials) {
        FoldSpec fold;
        fold.fold_index = t;
        // one held-out validation trial, drawn per fold from the seed
        std::vector<int> others;
        for (int o : trials)
            if (o != t) others.push_back(o);
        fold.validation_trial = others[rng.uniform_u32(static_cast<uint32_t>(others.size()))];
        for (size_t i = 0; i < manifest.size(); ++i) {
            if (manifest[i].status != ingest::ClipStatus::Kept) continue;
            const int trial = manifest[i].trial;
            if (trial == t)
                fold.test.push_back(static_cast<int>(i));
            else if (trial == fold.validation_trial)
                fold.validation.push_back(static_cast<int>(i));
            else
                fold.train.push_back(static_cast<int>(i));
        }
        folds.push_back(std::move(fold));
    }
    return folds;
}

}  // namespace flowgest::eval
