#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qnopt/linesearch.hpp"

using namespace qnopt;

namespace {

Problem half_square() {
    return Problem("half_square", Vector{1.0}, [](std::span<const double> x, std::span<double> g) {
        g[0] = x[0];
        return 0.5 * x[0] * x[0];
    });
}

Problem linear() {
    return Problem("linear", Vector{0.0}, [](std::span<const double> x, std::span<double> g) {
        g[0] = 1.0;
        return x[0];
    });
}

ErrorCode code_of(auto &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvariantViolation;
}

} // namespace

TEST_CASE("unit step accepted on 1/2 t^2") {
    const Problem p = half_square();
    EvalCounter c;
    const LineSearchParams ls;
    const StepResult r = wwp_line_search(p, c, Vector{1.0}, Vector{-1.0}, 0.5, -1.0, ls);
    CHECK(r.alpha == 1.0);
    CHECK(r.x_new == Vector{0.0});
    CHECK(r.f_new == 0.0);
    CHECK(r.trials == 1);
}

TEST_CASE("ascent direction rejected") {
    const Problem p = half_square();
    EvalCounter c;
    CHECK(code_of([&] { wwp_line_search(p, c, Vector{1.0}, Vector{1.0}, 0.5, 1.0, {}); }) == ErrorCode::NotDescent);
}

TEST_CASE("affine objective never meets curvature") {
    const Problem p = linear();
    EvalCounter c;
    CHECK(code_of([&] { wwp_line_search(p, c, Vector{0.0}, Vector{-1.0}, 0.0, -1.0, {}); }) ==
          ErrorCode::SearchFailed);
}

TEST_CASE("invalid parameters") {
    LineSearchParams ls;
    ls.sigma = 1e-5; // below rho
    CHECK_THROWS_AS(ls.validate(), Error);
    ls = {};
    ls.max_trials = 0;
    CHECK_THROWS_AS(ls.validate(), Error);
}

TEST_CASE("random 1D quartics: accepted steps satisfy both conditions and bracket is sound") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> scale(0.01, 50.0);
    const LineSearchParams ls;
    for (int trial = 0; trial < 300; ++trial) {
        const double a = scale(gen), b = u(gen);
        // f(t) = a (t - b)^4 + (t - b)^2
        const Problem p("quartic", Vector{0.0}, [a, b](std::span<const double> x, std::span<double> g) {
            const double t = x[0] - b;
            g[0] = 4.0 * a * t * t * t + 2.0 * t;
            return a * t * t * t * t + t * t;
        });
        const Vector x{u(gen)};
        EvalCounter c;
        const Evaluation e0 = evaluate(p, x, c);
        if (e0.g[0] == 0.0)
            continue;
        const Vector d{-e0.g[0] * scale(gen)};
        const double gd0 = e0.g[0] * d[0];

        std::vector<LineSearchTrial> trace;
        const StepResult r = wwp_line_search(p, c, x, d, e0.f, gd0, ls, &trace);
        CHECK(r.f_new < e0.f);
        CHECK(r.f_new <= e0.f + ls.rho * r.alpha * gd0);
        CHECK(r.gd_new >= ls.sigma * gd0);

        // Recompute phi(lo) independently: lo always passes Armijo; hi fails
        // it or lies beyond a point where curvature fails.
        for (const LineSearchTrial &t : trace) {
            if (t.lo > 0.0) {
                EvalCounter cc;
                const Evaluation at_lo = evaluate(p, Vector{x[0] + t.lo * d[0]}, cc);
                CHECK(sufficient_decrease(at_lo.f, e0.f, t.lo, gd0, ls.rho));
            }
            if (std::isfinite(t.hi)) {
                EvalCounter cc;
                const Evaluation at_hi = evaluate(p, Vector{x[0] + t.hi * d[0]}, cc);
                CHECK(!sufficient_decrease(at_hi.f, e0.f, t.hi, gd0, ls.rho));
            }
        }

        EvalCounter c2;
        const StepResult again = wwp_line_search(p, c2, x, d, e0.f, gd0, ls);
        CHECK(again.alpha == r.alpha);
    }
}
