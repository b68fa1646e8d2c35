#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qnopt/updates.hpp"

using namespace qnopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Reference diagonal update with Y3 deleted, written from the Lagrangian
// form: b_new = b + lambda * s.^2 - 1, where the multiplier lambda enforces
// s'diag(b_new)s = s'y.
Vector oracle_dnrtr(const Vector &b, const Vector &s, const Vector &y) {
    long double target = 0, base = 0, s4 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        target += static_cast<long double>(s[i]) * y[i];
        base += (static_cast<long double>(b[i]) - 1.0L) * s[i] * s[i];
        s4 += static_cast<long double>(s[i]) * s[i] * s[i] * s[i];
    }
    const long double lambda = (target - base) / s4;
    Vector out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        out[i] = static_cast<double>(b[i] + lambda * s[i] * s[i] - 1.0L);
    return out;
}

// The DNRTR rule in its own terms, on the raw gradient difference:
// b_i + [(s'y + s's - s'Bs) / sum s^4] s_i^2 - 1.
Vector dnrtr_rule(const Vector &b, const Vector &s, const Vector &y) {
    // A = diag(s_i^2); tr(A^2) = sum (s_i^2)^2, s'Bs = sum b_i s_i^2
    Vector a(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        a[i] = s[i] * s[i];
    double sy = 0.0, ss = 0.0, sbs = 0.0, tr = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        sy += s[i] * y[i];
        ss += a[i];
        sbs += b[i] * a[i];
        tr += a[i] * a[i];
    }
    const double lambda = (sy + ss - sbs) / tr;
    Vector out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        out[i] = b[i] + lambda * s[i] * s[i] - 1.0;
    return out;
}

Vector random_vector(std::mt19937_64 &gen, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (double &x : v)
        x = u(gen);
    return v;
}

} // namespace

TEST_CASE("y3 examples") {
    // f = x^2 / 2, x: 2 -> 1
    CHECK(y3_scalar(2.0, 0.5, Vector{2.0}, Vector{1.0}, Vector{-1.0}) == 0.0);
    // f = x^4, x: 1 -> 0.5
    CHECK_THAT(y3_scalar(1.0, 0.0625, Vector{4.0}, Vector{0.5}, Vector{-0.5}), WithinAbs(-1.5, 1e-15));
    try {
        y3_scalar(1.0, 1.0, Vector{1.0}, Vector{1.0}, Vector{0.0});
        FAIL("zero step accepted");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::ZeroStep);
    }
}

TEST_CASE("modified_y examples") {
    CHECK(modified_y(Vector{2.0, 3.0}, 0.5, Vector{1.0, -1.0}) == Vector{2.5, 2.5});
    CHECK(modified_y(Vector{2.0, 3.0}, 0.0, Vector{1.0, -1.0}) == Vector{2.0, 3.0});
    CHECK(modified_y(Vector{4.0}, -1.5, Vector{-0.5}) == Vector{4.75});
}

TEST_CASE("diagonal update examples") {
    DiagonalHessian h{Vector{3.0}, 1e-6};
    CHECK_THAT(diagonal_update(h, Vector{0.5}, Vector{4.75}).b[0], WithinAbs(9.5, 1e-14));

    h.b = {1.0, 1.0};
    CHECK(diagonal_update(h, Vector{1.0, 1.0}, Vector{2.0, 3.0}).b == Vector{2.5, 2.5});

    h.b = {2.0, 2.0};
    CHECK(diagonal_update(h, Vector{1.0, 0.0}, Vector{2.0, 7.0}).b == Vector{2.0, 1.0});

    CHECK_THROWS_AS(diagonal_update(h, Vector{0.0, 0.0}, Vector{1.0, 1.0}), Error);
}

TEST_CASE("weak secant identity on random tuples") {
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<std::size_t> dim(1, 40);
    std::uniform_real_distribution<double> lognorm(std::log(1e-3), std::log(10.0));
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = dim(gen);
        DiagonalHessian h{random_vector(gen, n, 0.1, 10.0), 1e-6};
        Vector s = random_vector(gen, n, -1.0, 1.0);
        const double target = std::exp(lognorm(gen));
        const double ns = norm2(s);
        for (double &v : s)
            v *= target / ns;
        const Vector y = random_vector(gen, n, -5.0, 5.0);
        apply_diagonal_update(h, s, y);
        double sbs = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sbs += h.b[i] * s[i] * s[i];
        const double sy = dot(s, y);
        CHECK(std::abs(sbs - sy) <= 1e-8 * std::max(1.0, std::abs(sy)));
    }
}

TEST_CASE("y3 vanishes on convex quadratics") {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 30;
        const Vector a = random_vector(gen, n, 0.1, 10.0);
        auto eval = [&](const Vector &x, Vector &g) {
            double f = 0.0;
            g.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                f += 0.5 * a[i] * x[i] * x[i];
                g[i] = a[i] * x[i];
            }
            return f;
        };
        const Vector xp = random_vector(gen, n, -3.0, 3.0);
        const Vector xc = random_vector(gen, n, -3.0, 3.0);
        Vector gp, gc;
        const double fp = eval(xp, gp), fc = eval(xc, gc);
        const double y3 = y3_scalar(fp, fc, gp, gc, difference(xc, xp));
        CHECK(std::abs(y3) <= 1e-10 * std::max(1.0, std::abs(fp)));
    }
}

TEST_CASE("update with y3 = 0 matches the reference rule") {
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 25;
        const Vector b = random_vector(gen, n, 0.1, 10.0);
        const Vector s = random_vector(gen, n, -2.0, 2.0);
        const Vector y = random_vector(gen, n, -2.0, 2.0);
        const Vector got = diagonal_update({b, 1e-6}, s, modified_y(y, 0.0, s)).b;
        const Vector want = dnrtr_rule(b, s, y);
        const Vector lagrange = oracle_dnrtr(b, s, y);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(got[i] - want[i]) <= 1e-15);
            CHECK(std::abs(got[i] - lagrange[i]) <= 1e-12 * std::max(1.0, std::abs(lagrange[i])));
        }
    }
}

TEST_CASE("safeguarded direction") {
    CHECK(safeguarded_direction({Vector{2.0, 4.0}, 1e-6}, Vector{2.0, 4.0}) == Vector{-1.0, -1.0});
    CHECK(safeguarded_direction({Vector{1e-9, 2.0}, 1e-6}, Vector{1.0, 4.0}) == Vector{-1.0, -2.0});
    CHECK(safeguarded_direction({Vector{3.0, -1.0}, 1e-6}, Vector{0.0, 0.0}) == Vector{-0.0, -0.0});

    std::mt19937_64 gen(14);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + trial % 20;
        const DiagonalHessian h{random_vector(gen, n, -1e3, 1e3), 1e-6};
        const Vector g = random_vector(gen, n, -1.0, 1.0);
        CHECK(dot(g, safeguarded_direction(h, g)) < 0.0);
    }
}

TEST_CASE("mbfgs3 dense update examples") {
    const DenseHessian I = DenseHessian::identity(2);
    const DenseHessian B = mbfgs3_full_update(I, Vector{1.0, 0.0}, Vector{2.0, 0.0});
    CHECK(B(0, 0) == 2.0);
    CHECK(B(0, 1) == 0.0);
    CHECK(B(1, 0) == 0.0);
    CHECK(B(1, 1) == 1.0);

    DenseHessian skip = I;
    CHECK_FALSE(apply_mbfgs3_update(skip, Vector{1.0, 0.0}, Vector{-1.0, 0.0}));
    CHECK(skip(0, 0) == 1.0);

    const DenseHessian same = mbfgs3_full_update(I, Vector{1.0, 0.0}, Vector{1.0, 0.0});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(same(i, j) == I(i, j));
}

TEST_CASE("mbfgs3 secant identity and inverse consistency") {
    std::mt19937_64 gen(15);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 10;
        DenseHessian B = DenseHessian::identity(n);
        DenseMatrix H = DenseMatrix::identity(n);
        for (int k = 0; k < 5; ++k) {
            const Vector s = random_vector(gen, n, -1.0, 1.0);
            const Vector y = axpy(s, 0.3, random_vector(gen, n, -1.0, 1.0));
            if (apply_mbfgs3_update(B, s, y)) {
                CHECK(apply_mbfgs3_inverse_update(H, s, y));
                CHECK(norm2(difference(B.multiply(s), y)) <= 1e-10 * norm2(y));
            }
        }
        // B H = I up to rounding
        for (std::size_t j = 0; j < n; ++j) {
            Vector e(n, 0.0);
            e[j] = 1.0;
            const Vector col = B.multiply(H.multiply(e));
            for (std::size_t i = 0; i < n; ++i)
                CHECK_THAT(col[i], WithinAbs(i == j ? 1.0 : 0.0, 1e-8));
        }
    }
}
