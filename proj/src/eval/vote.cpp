#include <cmath>

#include "flowgest/error.hpp"
#include "flowgest/eval.hpp"

namespace flowgest::eval {

int vote(const std::vector<std::vector<float>>& chunk_probs) {
    if (chunk_probs.empty()) fail("vote: no chunk predictions");
    const size_t classes = chunk_probs[0].size();
    if (classes == 0) fail("vote: empty probability vector");
    std::vector<double> mean(classes, 0.0);
    for (const auto& p : chunk_probs) {
        if (p.size() != classes)
            fail("vote: probability vector length " + std::to_string(p.size()) + " != " +
                 std::to_string(classes));
        for (size_t k = 0; k < classes; ++k) mean[k] += p[k];
    }
    int best = 0;
    for (size_t k = 1; k < classes; ++k)
        if (mean[k] > mean[best]) best = static_cast<int>(k);  // ties keep the lowest id
    return best;
}

TaskReport aggregate(const std::string& task, const std::vector<double>& fold_accuracies,
                     const std::string& method) {
    if (fold_accuracies.empty()) fail("aggregate: no fold accuracies");
    TaskReport r;
    r.method = method;
    r.task = task;
    r.fold_acc = fold_accuracies;
    double sum = 0;
    for (double a : fold_accuracies) sum += a;
    r.mean = sum / fold_accuracies.size();
    double sq = 0;
    for (double a : fold_accuracies) sq += (a - r.mean) * (a - r.mean);
    r.stddev = std::sqrt(sq / fold_accuracies.size());  // population std
    return r;
}

}  // namespace flowgest::eval
