#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "flowgest/net/tensor.hpp"
#include "flowgest/rng.hpp"

namespace testutil {

// Central finite differences at 64-bit against an analytic gradient.
// loss_fn must be a pure function of the buffer being perturbed.
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst;
};

inline double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

inline GradCheckResult check_gradient(double* values, const double* analytic_grad, size_t count,
                                      const std::function<double()>& loss_fn,
                                      const std::string& name, double h = 1e-4) {
    GradCheckResult res;
    for (size_t i = 0; i < count; ++i) {
        const double saved = values[i];
        values[i] = saved + h;
        const double up = loss_fn();
        values[i] = saved - h;
        const double down = loss_fn();
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double err = rel_err(analytic_grad[i], numeric);
        if (err > res.max_rel_err) {
            res.max_rel_err = err;
            res.worst = name + "[" + std::to_string(i) + "]: analytic " +
                        std::to_string(analytic_grad[i]) + " vs numeric " +
                        std::to_string(numeric);
        }
    }
    return res;
}

// same, but probing at most max_checks randomly chosen elements
inline GradCheckResult check_gradient_sampled(double* values, const double* analytic_grad,
                                              size_t count,
                                              const std::function<double()>& loss_fn,
                                              const std::string& name, size_t max_checks,
                                              flowgest::Rng& rng, double h = 1e-4) {
    GradCheckResult res;
    std::vector<size_t> idx;
    if (count <= max_checks) {
        for (size_t i = 0; i < count; ++i) idx.push_back(i);
    } else {
        for (size_t i = 0; i < max_checks; ++i)
            idx.push_back(rng.uniform_u32(static_cast<uint32_t>(count)));
    }
    for (size_t i : idx) {
        const double saved = values[i];
        values[i] = saved + h;
        const double up = loss_fn();
        values[i] = saved - h;
        const double down = loss_fn();
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double err = rel_err(analytic_grad[i], numeric);
        if (err > res.max_rel_err) {
            res.max_rel_err = err;
            res.worst = name + "[" + std::to_string(i) + "]";
        }
    }
    return res;
}

inline void fill_random(flowgest::net::TensorD& t, flowgest::Rng& rng, double scale = 1.0) {
    for (double& v : t.data) v = rng.normal(0.0, scale);
}

// random projection so every output element contributes to a scalar loss
inline flowgest::net::TensorD random_projection(const flowgest::net::TensorD& like,
                                                flowgest::Rng& rng) {
    flowgest::net::TensorD r(like.n, like.c, like.h, like.w);
    for (double& v : r.data) v = rng.normal(0.0, 1.0);
    return r;
}

inline double dot(const flowgest::net::TensorD& a, const flowgest::net::TensorD& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

}  // namespace testutil
