#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "qnopt/experiments.hpp"
#include "qnopt/solvers.hpp"

using namespace qnopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::string flood_path = std::string(QNOPT_SOURCE_DIR) + "/data/flood_synthetic.csv";

double rel_grad_err(const Problem &p, const Vector &x, double h) {
    EvalCounter c;
    const Evaluation e = evaluate(p, x, c);
    const Vector fd = fd_gradient(p, x, h);
    return norm2(difference(e.g, fd)) / std::max(1.0, norm2(e.g));
}

} // namespace

TEST_CASE("cs instance shape and determinism") {
    const CsInstance a = cs_instance(8, 4, 2, 7), b = cs_instance(8, 4, 2, 7);
    REQUIRE(a.A.size() == 32);
    for (double v : a.A)
        CHECK((v == 1.0 || v == -1.0));
    CHECK(a.A == b.A);
    CHECK(a.x_true == b.x_true);
    CHECK(a.y == b.y);
    std::size_t nnz = 0;
    for (double v : a.x_true)
        nnz += v != 0.0;
    CHECK(nnz == 2);

    const CsInstance zero = cs_instance(8, 4, 0, 7);
    CHECK(norm2(zero.x_true) == 0.0);
    CHECK(norm2(zero.y) == 0.0);

    CHECK(norm2(cs_instance(4096, 1024, 128, 1).y) > 0.0);
    CHECK_THROWS_AS(cs_instance(4, 8, 1, 1), Error);
    CHECK(cs_instance(64, 16, 4, 1).A != cs_instance(64, 16, 4, 2).A);
}

TEST_CASE("cs objective values and gradient") {
    CsInstance inst = cs_instance(64, 16, 4, 3);
    const double lambda = 0.2, eps = 1e-4;
    const Vector x_true = inst.x_true;
    const double yy = dot(inst.y, inst.y);
    const Problem p = cs_objective(inst, lambda, eps);
    EvalCounter c;

    CHECK_THAT(evaluate(p, Vector(64, 0.0), c).f, WithinRel(0.5 * yy + lambda * 64 * eps, 1e-14));

    double reg = 0.0;
    for (double v : x_true)
        reg += std::sqrt(v * v + eps * eps);
    CHECK_THAT(evaluate(p, x_true, c).f, WithinRel(lambda * reg, 1e-12));

    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 10; ++t) {
        Vector x(64);
        for (double &v : x)
            v = nd(gen);
        CHECK(rel_grad_err(p, x, 1e-6) <= 1e-5);
    }
    CHECK_THROWS_AS(cs_objective(inst, 0.0), Error);
}

TEST_CASE("rel_err") {
    CHECK(rel_err(Vector{1.0, 2.0}, Vector{1.0, 2.0}) == 0.0);
    CHECK(rel_err(Vector{0.0, 0.0}, Vector{1.0, 2.0}) == 100.0);
    CHECK_THAT(rel_err(Vector{1.0, 0.0}, Vector{0.0, 1.0}), WithinRel(100.0 * std::sqrt(2.0), 1e-15));
    for (double c : {0.0, 0.5, 2.0, -1.0}) {
        const Vector xt{0.3, -1.0, 4.0};
        Vector xs = xt;
        for (double &v : xs)
            v *= c;
        CHECK_THAT(rel_err(xs, xt), WithinAbs(100.0 * std::abs(c - 1.0), 1e-12));
    }
    try {
        rel_err(Vector{1.0}, Vector{0.0});
        FAIL("accepted zero reference");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::ZeroReference);
    }
}

TEST_CASE("small recovery problem") {
    CsInstance inst = cs_instance(256, 64, 4, 9);
    const Vector x_true = inst.x_true;
    const double lambda = cs_default_lambda(inst);
    SolverConfig cfg;
    cfg.variant = Variant::wdmbfgs3;
    const SolverReport r = solve(cs_objective(std::move(inst), lambda), cfg);
    CHECK(rel_err(r.x_final, x_true) <= 10.0);
}

TEST_CASE("flood csv parsing") {
    std::istringstream simple("10,10\n10,10\n");
    const MuskingumData d = parse_flood_csv(simple);
    CHECK(d.size() == 2);
    CHECK(d.inflow == std::vector<double>{10.0, 10.0});

    std::istringstream header("inflow,outflow\n\n1,2\n3,4\n");
    CHECK(parse_flood_csv(header).size() == 2);

    std::istringstream bad("inflow,outflow\n1,2\n3,abc\n");
    try {
        parse_flood_csv(bad);
        FAIL("accepted bad cell");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    std::istringstream one("5,5\n");
    CHECK_THROWS_AS(parse_flood_csv(one), Error);

    CHECK(load_flood_csv(flood_path).size() == 20);
    CHECK_THROWS_AS(load_flood_csv("/nonexistent/flood.csv"), Error);
}

TEST_CASE("muskingum objective") {
    MuskingumData flat{std::vector<double>(6, 7.0), std::vector<double>(6, 7.0), 12.0};
    const Problem pf = muskingum_problem(flat);
    EvalCounter c;
    CHECK(evaluate(pf, Vector{0.3, 0.4, 1.7}, c).f == 0.0);

    const Problem p = muskingum_problem(load_flood_csv(flood_path));
    CHECK(rel_grad_err(p, Vector{0.1, 0.3, 1.5}, 1e-6) <= 1e-5);

    MuskingumData skew{{1.0, 2.0, 3.0}, {5.0, 6.0, 7.0}, 12.0};
    try {
        evaluate(muskingum_problem(skew), Vector{0.1, 2.0, 1.5}, c);
        FAIL("negative base accepted");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DomainError);
    }
}

TEST_CASE("muskingum gradient at random feasible points") {
    const MuskingumData data = load_flood_csv(flood_path);
    const Problem p = muskingum_problem(data);
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> x1(-1.0, 1.0), x2(0.0, 1.0), x3(0.5, 2.5);
    for (int t = 0; t < 50; ++t) {
        const Vector x{x1(gen), x2(gen), x3(gen)};
        CHECK(rel_grad_err(p, x, 1e-7) <= 1e-5);
    }
}
