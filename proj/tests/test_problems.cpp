#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qnopt/problems.hpp"

using namespace qnopt;
using Catch::Matchers::WithinAbs;

TEST_CASE("catalogue lookup") {
    const Problem p = make_problem("ext_rosenbrock", 2);
    REQUIRE(p.dim() == 2);
    CHECK(p.start() == Vector{-1.2, 1.0});

    try {
        make_problem("ext_rosenbrock", 3);
        FAIL("odd dimension accepted");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::IncompatibleDimension);
    }
    try {
        make_problem("no_such_problem", 10);
        FAIL("unknown name accepted");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::UnknownProblem);
    }
    CHECK(problem_names().size() >= 16);
}

TEST_CASE("rosenbrock closed form") {
    const Problem p = make_problem("ext_rosenbrock", 2);
    EvalCounter c;
    const Evaluation at_min = evaluate(p, Vector{1.0, 1.0}, c);
    CHECK(at_min.f == 0.0);
    CHECK(at_min.g == Vector{0.0, 0.0});

    // 100 (x2 - x1^2)^2 + (1 - x1)^2 at (-1.2, 1), differentiated by hand.
    const Evaluation e = evaluate(p, p.start(), c);
    CHECK_THAT(e.f, WithinAbs(24.2, 1e-12));
    CHECK_THAT(e.g[0], WithinAbs(-215.6, 1e-10));
    CHECK_THAT(e.g[1], WithinAbs(-88.0, 1e-12));

    const Vector fd = fd_gradient(p, p.start(), 1e-6);
    CHECK_THAT(fd[0], WithinAbs(-215.6, 1e-4));
    CHECK_THAT(fd[1], WithinAbs(-88.0, 1e-4));
}

TEST_CASE("counter counts f and g per call") {
    const Problem p = make_problem("raydan1", 10);
    EvalCounter c;
    for (int k = 1; k <= 7; ++k) {
        evaluate(p, p.start(), c);
        CHECK(c.nfg() == static_cast<std::size_t>(2 * k));
    }
    c.reset();
    CHECK(c.nfg() == 0);
}

TEST_CASE("fd_gradient on constant and affine functions") {
    const Problem constant("c", Vector(3, 0.0), [](std::span<const double>, std::span<double> g) {
        for (double &v : g)
            v = 0.0;
        return 4.0;
    });
    for (double v : fd_gradient(constant, Vector{0.3, -1.0, 2.0}, 1e-4))
        CHECK(v == 0.0);

    const Vector a{1.5, -2.0, 0.25};
    const Problem affine("a", Vector(3, 0.0), [a](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            f += a[i] * x[i];
            g[i] = a[i];
        }
        return f;
    });
    const Vector fd = fd_gradient(affine, Vector{0.3, -1.0, 2.0}, 1e-3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK_THAT(fd[i], WithinAbs(a[i], 1e-10));

    CHECK_THROWS_AS(fd_gradient(affine, Vector(3, 0.0), 0.0), Error);
}

TEST_CASE("analytic gradients agree with central differences") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const std::string &name : problem_names()) {
        const std::size_t n = 6;
        const Problem p = make_problem(name, n);
        for (int trial = 0; trial < 20; ++trial) {
            Vector x(n);
            for (double &v : x)
                v = u(gen);
            EvalCounter c;
            const Evaluation e = evaluate(p, x, c);
            const Vector fd = fd_gradient(p, x, 1e-6);
            const double err = norm2(difference(e.g, fd));
            INFO(name << " trial " << trial << " err " << err);
            CHECK(err <= 1e-5 * (1.0 + norm2(e.g)));
        }
    }
}

TEST_CASE("start points are finite at benchmark sizes") {
    for (const std::string &name : problem_names()) {
        for (std::size_t n : {900, 1500, 2100}) {
            const Problem p = make_problem(name, n);
            EvalCounter c;
            const Evaluation e = evaluate(p, p.start(), c);
            INFO(name << " n=" << n);
            CHECK(std::isfinite(e.f));
            CHECK(all_finite(e.g));
        }
    }
}

TEST_CASE("evaluate rejects wrong length") {
    const Problem p = make_problem("raydan2", 4);
    EvalCounter c;
    CHECK_THROWS_AS(evaluate(p, Vector(3, 0.0), c), Error);
}
