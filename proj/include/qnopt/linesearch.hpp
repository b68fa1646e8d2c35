#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qnopt/core.hpp"
#include "qnopt/problems.hpp"

namespace qnopt {

/// Weak Wolfe constants and search limits. Requires 0 < rho < sigma < 1.
struct LineSearchParams {
    double rho = 1e-4;
    double sigma = 0.8;
    double alpha_init = 1.0;
    double alpha_max = 1e6;
    int max_trials = 60;

    void validate() const {
        if (!(rho > 0.0 && rho < sigma && sigma < 1.0))
            throw Error(ErrorCode::InvalidConfig, "line search needs 0 < rho < sigma < 1");
        if (!(alpha_init > 0.0) || !(alpha_max >= alpha_init))
            throw Error(ErrorCode::InvalidConfig, "line search needs 0 < alpha_init <= alpha_max");
        if (max_trials <= 0)
            throw Error(ErrorCode::InvalidConfig, "line search needs max_trials > 0");
    }
};

struct StepResult {
    double alpha = 0.0;
    Vector x_new;
    double f_new = 0.0;
    Vector g_new;
    double gd_new = 0.0; // g_new . d
    int trials = 0;
};

/// One trial of the search, recorded when a trace is requested. `hi` is
/// +inf until a bracket exists.
struct LineSearchTrial {
    double alpha;
    double f;
    double gd;
    bool sufficient_decrease;
    bool curvature;
    double lo;
    double hi;
};

inline bool sufficient_decrease(double f_new, double f0, double alpha, double gd0, double rho) {
    // f_new < f0 is implied in exact arithmetic; it keeps rounding from
    // accepting a step that does not move f.
    return std::isfinite(f_new) && f_new <= f0 + rho * alpha * gd0 && f_new < f0;
}

inline bool curvature_condition(double gd_new, double gd0, double sigma) {
    return std::isfinite(gd_new) && gd_new >= sigma * gd0;
}

/// Expand-then-bisect search for a step satisfying
///   f(x + a d) <= f(x) + rho a g'd   and   g(x + a d)'d >= sigma g'd.
/// Points where the objective throws DomainError count as failed decrease.
inline StepResult wwp_line_search(const Problem &p, EvalCounter &counter, std::span<const double> x,
                                  std::span<const double> d, double f0, double gd0,
                                  const LineSearchParams &params,
                                  std::vector<LineSearchTrial> *trace = nullptr) {
    detail::require_same_size(x.size(), d.size(), "wwp_line_search");
    if (!(gd0 < 0.0))
        throw Error(ErrorCode::NotDescent, "directional derivative " + std::to_string(gd0) + " is not negative");

    constexpr double inf = std::numeric_limits<double>::infinity();
    double lo = 0.0;
    double hi = inf;
    double alpha = params.alpha_init;

    for (int trial = 1; trial <= params.max_trials; ++trial) {
        StepResult r;
        r.alpha = alpha;
        r.trials = trial;
        r.x_new = axpy(x, alpha, d);
        try {
            Evaluation e = evaluate(p, r.x_new, counter);
            r.f_new = e.f;
            r.g_new = std::move(e.g);
            r.gd_new = dot(r.g_new, d);
        } catch (const Error &err) {
            if (err.code() != ErrorCode::DomainError)
                throw;
            r.f_new = inf;
            r.gd_new = inf;
        }

        const bool decrease = sufficient_decrease(r.f_new, f0, alpha, gd0, params.rho);
        const bool curv = decrease && curvature_condition(r.gd_new, gd0, params.sigma);
        if (trace)
            trace->push_back({alpha, r.f_new, r.gd_new, decrease, curv, lo, hi});

        if (!decrease || !all_finite(r.g_new)) {
            hi = alpha;
            alpha = 0.5 * (lo + hi);
            continue;
        }
        if (curv)
            return r;

        lo = alpha;
        if (hi == inf) {
            alpha *= 2.0;
            if (alpha > params.alpha_max)
                throw Error(ErrorCode::SearchFailed, "step exceeded alpha_max without meeting curvature");
        } else {
            alpha = 0.5 * (lo + hi);
        }
    }
    throw Error(ErrorCode::SearchFailed,
                "no weak Wolfe step within " + std::to_string(params.max_trials) + " trials");
}

} // namespace qnopt
