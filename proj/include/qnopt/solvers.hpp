#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qnopt/core.hpp"
#include "qnopt/linesearch.hpp"
#include "qnopt/problems.hpp"
#include "qnopt/updates.hpp"

namespace qnopt {

enum class Variant { dmbfgs3, wdmbfgs3, mbfgs3, dnrtr };
enum class PairMode { step, extrapolated };
enum class Status { ConvergedGradNorm, MaxIterations, LineSearchFailure, NumericalBreakdown };

constexpr std::string_view to_string(Variant v) noexcept {
    switch (v) {
    case Variant::dmbfgs3: return "dmbfgs3";
    case Variant::wdmbfgs3: return "wdmbfgs3";
    case Variant::mbfgs3: return "mbfgs3";
    case Variant::dnrtr: return "dnrtr";
    }
    return "?";
}

constexpr std::string_view to_string(PairMode m) noexcept {
    return m == PairMode::step ? "step" : "extrapolated";
}

constexpr std::string_view to_string(Status s) noexcept {
    switch (s) {
    case Status::ConvergedGradNorm: return "ConvergedGradNorm";
    case Status::MaxIterations: return "MaxIterations";
    case Status::LineSearchFailure: return "LineSearchFailure";
    case Status::NumericalBreakdown: return "NumericalBreakdown";
    }
    return "?";
}

inline constexpr Variant all_variants[] = {Variant::dmbfgs3, Variant::wdmbfgs3, Variant::mbfgs3, Variant::dnrtr};

inline Variant parse_variant(std::string_view name) {
    for (Variant v : all_variants)
        if (to_string(v) == name)
            return v;
    throw Error(ErrorCode::UnknownSolver, std::string(name));
}

inline PairMode parse_pair_mode(std::string_view name) {
    if (name == "step")
        return PairMode::step;
    if (name == "extrapolated")
        return PairMode::extrapolated;
    throw Error(ErrorCode::InvalidConfig, "unknown pair mode: " + std::string(name));
}

inline Status parse_status(std::string_view name) {
    for (Status s : {Status::ConvergedGradNorm, Status::MaxIterations, Status::LineSearchFailure,
                     Status::NumericalBreakdown})
        if (to_string(s) == name)
            return s;
    throw Error(ErrorCode::ParseError, "unknown status: " + std::string(name));
}

struct SolverConfig {
    double eps_g = 1e-6;
    double eps_b = 1e-6;
    int max_iter = 5000;
    LineSearchParams ls;
    double tau_cap = 0.9;
    PairMode pair_mode = PairMode::step;
    Variant variant = Variant::dmbfgs3;
    double b_init = 1.0;

    bool clamp_stored = false;
    /// Run a diagonal variant with Y3 replaced by zero (DNRTR update).
    bool force_zero_y3 = false;
    /// Inertial variant: take tau_k = 0 instead of tau~_k when the
    /// extrapolated point has a larger objective than x_k.
    bool monotone_inertia = true;
    /// Relative zero-step threshold: updates are skipped when
    /// |s| <= eps_s_rel * max(1, |x|).
    double eps_s_rel = 1e-14;
    double eps_curv = 1e-12;
    /// Keep every iterate in SolverReport::x_history.
    bool record_iterates = false;

    void validate() const {
        ls.validate();
        if (!(eps_g > 0.0))
            throw Error(ErrorCode::InvalidConfig, "eps_g must be positive");
        if (!(eps_b > 0.0))
            throw Error(ErrorCode::InvalidConfig, "eps_b must be positive");
        if (max_iter <= 0)
            throw Error(ErrorCode::InvalidConfig, "max_iter must be positive");
        if (!(tau_cap >= 0.0 && tau_cap < 1.0))
            throw Error(ErrorCode::InvalidConfig, "tau_cap must lie in [0, 1)");
        if (!(b_init > 0.0))
            throw Error(ErrorCode::InvalidConfig, "b_init must be positive");
    }
};

struct SolverReport {
    Status status = Status::NumericalBreakdown;
    std::size_t iterations = 0;
    /// Number of (f, g) evaluation pairs.
    std::size_t nfg = 0;
    double cpu_seconds = 0.0;
    double f_final = 0.0;
    double gnorm_final = 0.0;
    Vector x_final;
    std::vector<double> y3_trace;
    std::vector<double> f_trace;
    /// Inertial variant only: the tau_k actually applied per iteration.
    std::vector<double> tau_trace;
    std::vector<double> alpha_trace;
    std::vector<Vector> x_history;
};

/// tau~_k = min{1 / (k^2 |x_k - x_{k-1}|^2), tau_cap}, or tau_cap when
/// x_k = x_{k-1}.
inline double inertial_coefficient(std::size_t k, std::span<const double> x_k, std::span<const double> x_prev,
                                   double tau_cap) {
    detail::require_same_size(x_k.size(), x_prev.size(), "inertial_coefficient");
    double dd = 0.0;
    for (std::size_t i = 0; i < x_k.size(); ++i) {
        const double t = x_k[i] - x_prev[i];
        dd += t * t;
    }
    if (dd == 0.0)
        return tau_cap;
    const double kk = static_cast<double>(k) * static_cast<double>(k);
    return std::min(1.0 / (kk * dd), tau_cap);
}

namespace detail {

struct DiagonalModel {
    DiagonalHessian h;
    bool clamp = false;

    Vector direction(std::span<const double> g) const { return safeguarded_direction(h, g); }
    void update(std::span<const double> s, std::span<const double> y_star) {
        apply_diagonal_update(h, s, y_star);
        if (clamp)
            clamp_stored(h);
    }
    bool finite() const { return all_finite(h.b); }
};

// Keeps B and H = B^{-1} in step; the direction solve B d = -g is d = -H g.
struct DenseModel {
    DenseHessian B;
    DenseMatrix H;
    double eps_curv = 1e-12;

    Vector direction(std::span<const double> g) const {
        Vector d = H.multiply(g);
        for (double &v : d)
            v = -v;
        return d;
    }
    void update(std::span<const double> s, std::span<const double> y_star) {
        if (apply_mbfgs3_update(B, s, y_star, eps_curv))
            apply_mbfgs3_inverse_update(H, s, y_star, eps_curv);
    }
    bool finite() const { return B.all_finite() && H.all_finite(); }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline bool step_is_zero(std::span<const double> s, std::span<const double> x, double eps_s_rel) {
    return norm2(s) <= eps_s_rel * std::max(1.0, norm2(x));
}

inline void check_wwp(const StepResult &r, double f0, double gd0, const LineSearchParams &ls) {
    invariant(sufficient_decrease(r.f_new, f0, r.alpha, gd0, ls.rho), "accepted step violates sufficient decrease");
    invariant(curvature_condition(r.gd_new, gd0, ls.sigma), "accepted step violates curvature condition");
}

// Applies one quasi-Newton update from the pair (x_a, e_a) -> (x_b, e_b).
// Returns the Y3 value used, or NaN when the step was too small to update.
template <class Model>
double update_from_pair(Model &model, std::span<const double> x_a, const Evaluation &e_a,
                        std::span<const double> x_b, const Evaluation &e_b, bool zero_y3,
                        double eps_s_rel) {
    const Vector s = difference(x_b, x_a);
    if (step_is_zero(s, x_b, eps_s_rel))
        return std::nan("");
    const Vector y = difference(e_b.g, e_a.g);
    const double y3 = zero_y3 ? 0.0 : y3_scalar(e_a.f, e_b.f, e_a.g, e_b.g, s);
    const Vector y_star = modified_y(y, y3, s);
    model.update(s, y_star);
    return y3;
}

// Shared loop for dmbfgs3, dnrtr and mbfgs3.
template <class Model>
SolverReport run_plain(const Problem &p, std::span<const double> x0, const SolverConfig &cfg, Model model,
                       bool zero_y3) {
    Stopwatch clock;
    SolverReport rep;
    EvalCounter counter;

    Vector x(x0.begin(), x0.end());
    Evaluation cur = evaluate(p, x, counter);
    rep.f_trace.push_back(cur.f);
    if (cfg.record_iterates)
        rep.x_history.push_back(x);

    auto finish = [&](Status status) {
        rep.status = status;
        rep.nfg = counter.nf;
        rep.f_final = cur.f;
        rep.gnorm_final = norm2(cur.g);
        rep.x_final = x;
        rep.cpu_seconds = clock.seconds();
        return rep;
    };

    if (!std::isfinite(cur.f) || !all_finite(cur.g))
        return finish(Status::NumericalBreakdown);

    for (;;) {
        if (norm2(cur.g) <= cfg.eps_g)
            return finish(Status::ConvergedGradNorm);
        if (rep.iterations >= static_cast<std::size_t>(cfg.max_iter))
            return finish(Status::MaxIterations);

        const Vector d = model.direction(cur.g);
        const double gd = dot(cur.g, d);
        if (!std::isfinite(gd) || !(gd < 0.0))
            return finish(Status::NumericalBreakdown);

        StepResult step;
        try {
            step = wwp_line_search(p, counter, x, d, cur.f, gd, cfg.ls);
        } catch (const Error &e) {
            if (e.code() == ErrorCode::SearchFailed || e.code() == ErrorCode::NotDescent)
                return finish(Status::LineSearchFailure);
            throw;
        }
        check_wwp(step, cur.f, gd, cfg.ls);

        Evaluation next{step.f_new, std::move(step.g_new)};
        const double y3 = update_from_pair(model, x, cur, step.x_new, next, zero_y3, cfg.eps_s_rel);
        if (!std::isnan(y3))
            rep.y3_trace.push_back(std::abs(y3));

        invariant(next.f < cur.f, "objective did not decrease");
        x = std::move(step.x_new);
        cur = std::move(next);
        ++rep.iterations;
        rep.f_trace.push_back(cur.f);
        rep.alpha_trace.push_back(step.alpha);
        if (cfg.record_iterates)
            rep.x_history.push_back(x);

        if (!model.finite())
            return finish(Status::NumericalBreakdown);
    }
}

// Inertial variant. Per iteration: tau_k, p_k = x_k + tau_k (x_k - x_{k-1}),
// gradient test at p_k, direction from g(p_k), weak Wolfe search from p_k,
// x_{k+1} = p_k + alpha_k d_k, then the update pair chosen by pair_mode.
inline SolverReport run_inertial(const Problem &p, std::span<const double> x0, const SolverConfig &cfg) {
    Stopwatch clock;
    SolverReport rep;
    EvalCounter counter;
    DiagonalModel model{DiagonalHessian::scaled_identity(p.dim(), cfg.b_init, cfg.eps_b), cfg.clamp_stored};

    Vector xk(x0.begin(), x0.end());
    Vector x_prev = xk;
    Evaluation cur = evaluate(p, xk, counter);
    rep.f_trace.push_back(cur.f);
    if (cfg.record_iterates)
        rep.x_history.push_back(xk);

    Vector pk = xk;
    Evaluation at_p = cur;
    Vector p_prev;
    Evaluation at_p_prev;
    bool have_p_prev = false;

    auto finish = [&](Status status, const Vector &x, const Evaluation &e) {
        rep.status = status;
        rep.nfg = counter.nf;
        rep.f_final = e.f;
        rep.gnorm_final = norm2(e.g);
        rep.x_final = x;
        rep.cpu_seconds = clock.seconds();
        return rep;
    };

    if (!std::isfinite(cur.f) || !all_finite(cur.g))
        return finish(Status::NumericalBreakdown, xk, cur);

    for (std::size_t k = 1;; ++k) {
        const double tau_tilde = inertial_coefficient(k, xk, x_prev, cfg.tau_cap);
        const Vector delta = difference(xk, x_prev);
        const double dd = dot(delta, delta);
        invariant(tau_tilde <= cfg.tau_cap, "tau exceeds cap");
        invariant(dd == 0.0 || tau_tilde <= 1.0 / (static_cast<double>(k) * static_cast<double>(k) * dd),
                  "tau exceeds 1/(k^2 |x_k - x_{k-1}|^2)");

        double tau = 0.0;
        pk = xk;
        at_p = cur;
        if (tau_tilde > 0.0 && dd > 0.0) {
            Vector trial = axpy(xk, tau_tilde, delta);
            try {
                Evaluation e = evaluate(p, trial, counter);
                const bool usable = std::isfinite(e.f) && all_finite(e.g);
                if (usable && (!cfg.monotone_inertia || e.f <= cur.f)) {
                    tau = tau_tilde;
                    pk = std::move(trial);
                    at_p = std::move(e);
                }
            } catch (const Error &err) {
                if (err.code() != ErrorCode::DomainError)
                    throw;
            }
        }
        invariant(tau <= tau_tilde, "applied tau exceeds tau~");
        rep.tau_trace.push_back(tau);

        if (cfg.pair_mode == PairMode::extrapolated && have_p_prev) {
            const double y3 =
                update_from_pair(model, p_prev, at_p_prev, pk, at_p, cfg.force_zero_y3, cfg.eps_s_rel);
            if (!std::isnan(y3))
                rep.y3_trace.push_back(std::abs(y3));
            if (!model.finite())
                return finish(Status::NumericalBreakdown, pk, at_p);
        }

        if (norm2(at_p.g) <= cfg.eps_g)
            return finish(Status::ConvergedGradNorm, pk, at_p);
        if (rep.iterations >= static_cast<std::size_t>(cfg.max_iter))
            return finish(Status::MaxIterations, pk, at_p);

        const Vector d = model.direction(at_p.g);
        const double gd = dot(at_p.g, d);
        if (!std::isfinite(gd) || !(gd < 0.0))
            return finish(Status::NumericalBreakdown, pk, at_p);

        StepResult step;
        try {
            step = wwp_line_search(p, counter, pk, d, at_p.f, gd, cfg.ls);
        } catch (const Error &e) {
            if (e.code() == ErrorCode::SearchFailed || e.code() == ErrorCode::NotDescent)
                return finish(Status::LineSearchFailure, pk, at_p);
            throw;
        }
        check_wwp(step, at_p.f, gd, cfg.ls);
        invariant(step.f_new < at_p.f, "objective did not decrease from extrapolated point");

        Evaluation next{step.f_new, std::move(step.g_new)};
        if (cfg.pair_mode == PairMode::step) {
            const double y3 = update_from_pair(model, pk, at_p, step.x_new, next, cfg.force_zero_y3, cfg.eps_s_rel);
            if (!std::isnan(y3))
                rep.y3_trace.push_back(std::abs(y3));
        }

        p_prev = pk;
        at_p_prev = at_p;
        have_p_prev = true;
        x_prev = std::move(xk);
        xk = std::move(step.x_new);
        cur = std::move(next);
        ++rep.iterations;
        rep.f_trace.push_back(cur.f);
        rep.alpha_trace.push_back(step.alpha);
        if (cfg.record_iterates)
            rep.x_history.push_back(xk);

        if (!model.finite())
            return finish(Status::NumericalBreakdown, xk, cur);
    }
}

} // namespace detail

/// Minimizes `p` from `x0` with the method selected by `cfg.variant`.
/// Solver-level failures are reported through SolverReport::status.
inline SolverReport solve(const Problem &p, std::span<const double> x0, const SolverConfig &cfg) {
    detail::require_same_size(x0.size(), p.dim(), "solve");
    cfg.validate();
    const std::size_t n = p.dim();
    switch (cfg.variant) {
    case Variant::dmbfgs3:
    case Variant::dnrtr: {
        detail::DiagonalModel model{DiagonalHessian::scaled_identity(n, cfg.b_init, cfg.eps_b), cfg.clamp_stored};
        const bool zero_y3 = cfg.variant == Variant::dnrtr || cfg.force_zero_y3;
        return detail::run_plain(p, x0, cfg, std::move(model), zero_y3);
    }
    case Variant::mbfgs3: {
        detail::DenseModel model{DenseHessian::identity(n), DenseMatrix::identity(n), cfg.eps_curv};
        return detail::run_plain(p, x0, cfg, std::move(model), cfg.force_zero_y3);
    }
    case Variant::wdmbfgs3:
        return detail::run_inertial(p, x0, cfg);
    }
    throw Error(ErrorCode::UnknownSolver, "unhandled variant");
}

inline SolverReport solve(const Problem &p, const SolverConfig &cfg) { return solve(p, p.start(), cfg); }

} // namespace qnopt
