#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qnopt/core.hpp"
#include "qnopt/problems.hpp"

namespace qnopt {

// ---------------------------------------------------------------------------
// Compressive sensing

/// Sparse recovery instance y = A x_true with a dense Bernoulli +-1 matrix.
struct CsInstance {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<double> A; // m x n, row-major
    Vector x_true;
    Vector y;

    double a(std::size_t row, std::size_t col) const noexcept { return A[row * n + col]; }
};

namespace detail {

inline Vector matvec(const CsInstance &inst, std::span<const double> x) {
    Vector out(inst.m, 0.0);
    for (std::size_t r = 0; r < inst.m; ++r)
        out[r] = dot(std::span<const double>(inst.A.data() + r * inst.n, inst.n), x);
    return out;
}

inline Vector matvec_transposed(const CsInstance &inst, std::span<const double> v) {
    Vector out(inst.n, 0.0);
    for (std::size_t r = 0; r < inst.m; ++r) {
        const double *row = inst.A.data() + r * inst.n;
        for (std::size_t c = 0; c < inst.n; ++c)
            out[c] += row[c] * v[r];
    }
    return out;
}

} // namespace detail

/// Draws A with independent equiprobable +-1 entries, places k nonzeros at
/// uniformly chosen positions with standard normal values, and sets y = A x.
inline CsInstance cs_instance(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed) {
    if (n == 0 || m == 0 || k > n || m > n)
        throw Error(ErrorCode::InvalidDimensions, "cs_instance needs 0 < m <= n and k <= n");
    CsInstance inst;
    inst.n = n;
    inst.m = m;
    inst.k = k;
    inst.seed = seed;

    std::mt19937_64 gen(seed);
    inst.A.resize(m * n);
    std::bernoulli_distribution coin(0.5);
    for (double &v : inst.A)
        v = coin(gen) ? 1.0 : -1.0;

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k entries become the support.
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(gen)]);
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    inst.x_true.assign(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        double v = 0.0;
        while (v == 0.0)
            v = normal(gen);
        inst.x_true[idx[i]] = v;
    }
    inst.y = detail::matvec(inst, inst.x_true);
    return inst;
}

/// Default regularization weight 0.01 * |A'y|_inf.
inline double cs_default_lambda(const CsInstance &inst) {
    return 0.01 * norm_inf(detail::matvec_transposed(inst, inst.y));
}

/// f(x) = 1/2 |Ax - y|^2 + lambda sum sqrt(x_i^2 + eps^2), started at 0.
inline Problem cs_objective(CsInstance inst, double lambda, double eps_smooth = 1e-4) {
    if (!(lambda > 0.0) || !(eps_smooth > 0.0))
        throw Error(ErrorCode::InvalidConfig, "cs_objective needs lambda > 0 and eps_smooth > 0");
    auto shared = std::make_shared<const CsInstance>(std::move(inst));
    const std::size_t n = shared->n;
    return Problem("cs", Vector(n, 0.0), [shared, lambda, eps_smooth](std::span<const double> x, std::span<double> g) {
        const CsInstance &in = *shared;
        Vector r = detail::matvec(in, x);
        double f = 0.0;
        for (std::size_t i = 0; i < in.m; ++i) {
            r[i] -= in.y[i];
            f += 0.5 * r[i] * r[i];
        }
        const Vector atr = detail::matvec_transposed(in, r);
        const double e2 = eps_smooth * eps_smooth;
        for (std::size_t i = 0; i < in.n; ++i) {
            const double root = std::sqrt(x[i] * x[i] + e2);
            f += lambda * root;
            g[i] = atr[i] + lambda * x[i] / root;
        }
        return f;
    });
}

/// 100 |x* - x_true| / |x_true|, in percent.
inline double rel_err(std::span<const double> x_star, std::span<const double> x_true) {
    detail::require_same_size(x_star.size(), x_true.size(), "rel_err");
    const double ref = norm2(x_true);
    if (!(ref > 0.0))
        throw Error(ErrorCode::ZeroReference, "rel_err: reference signal is zero");
    return 100.0 * norm2(difference(x_star, x_true)) / ref;
}

// ---------------------------------------------------------------------------
// Muskingum

struct MuskingumData {
    std::vector<double> inflow;
    std::vector<double> outflow;
    double dt = 12.0; // hours

    std::size_t size() const noexcept { return inflow.size(); }
};

inline void validate(const MuskingumData &data) {
    if (data.inflow.size() != data.outflow.size())
        throw Error(ErrorCode::DimensionMismatch, "inflow and outflow lengths differ");
    if (data.inflow.size() < 2)
        throw Error(ErrorCode::TooShort, "Muskingum data needs at least 2 time steps");
    if (!all_finite(data.inflow) || !all_finite(data.outflow) || !std::isfinite(data.dt) || !(data.dt > 0.0))
        throw Error(ErrorCode::NonFiniteValue, "Muskingum data must be finite with dt > 0");
}

namespace detail {

inline bool parse_double(std::string_view s, double &out) {
    s = trim(s);
    if (s.empty())
        return false;
    if (s.front() == '+')
        s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace detail

/// Parses `inflow,outflow` rows. A non-numeric first row is taken as a
/// header; blank lines are ignored.
inline MuskingumData parse_flood_csv(std::istream &in, double dt = 12.0) {
    MuskingumData data;
    data.dt = dt;
    std::string line;
    std::size_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = detail::trim(line);
        if (row.empty())
            continue;
        const auto comma = row.find(',');
        double inflow = 0.0, outflow = 0.0;
        const bool ok = comma != std::string_view::npos && row.find(',', comma + 1) == std::string_view::npos &&
                        detail::parse_double(row.substr(0, comma), inflow) &&
                        detail::parse_double(row.substr(comma + 1), outflow);
        if (!ok) {
            if (!seen_content) {
                seen_content = true;
                continue; // header
            }
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected two numbers, got '" +
                                                   std::string(row) + "'");
        }
        seen_content = true;
        data.inflow.push_back(inflow);
        data.outflow.push_back(outflow);
    }
    validate(data);
    return data;
}

inline MuskingumData load_flood_csv(const std::filesystem::path &path, double dt = 12.0) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_flood_csv(in, dt);
}

/// Least-squares objective of the nonlinear Muskingum model over (x1, x2, x3):
///   sum_{i<T} [ c1 x1 (P_{i+1} - P_i) - dt/2 (I_i - Q_i) + c3 (I_{i+1} - Q_{i+1}) ]^2
/// with P_i = (x2 I_i + (1 - x2) Q_i)^x3, c1 = 1 - dt/6, c3 = dt/2 (1 - dt/3).
/// Evaluation throws DomainError when some base is not positive.
inline Problem muskingum_problem(MuskingumData data) {
    validate(data);
    auto shared = std::make_shared<const MuskingumData>(std::move(data));
    return Problem("muskingum", Vector{0.0, 1.0, 1.0}, [shared](std::span<const double> x, std::span<double> g) {
        const MuskingumData &d = *shared;
        const double c1 = 1.0 - d.dt / 6.0;
        const double c2 = d.dt / 2.0;
        const double c3 = d.dt / 2.0 * (1.0 - d.dt / 3.0);
        const std::size_t T = d.size();

        // P_i, dP_i/dx2 and dP_i/dx3 for every time step.
        std::vector<double> pw(T), dpw2(T), dpw3(T);
        for (std::size_t i = 0; i < T; ++i) {
            const double base = x[1] * d.inflow[i] + (1.0 - x[1]) * d.outflow[i];
            if (!(base > 0.0))
                throw Error(ErrorCode::DomainError,
                            "Muskingum power base " + std::to_string(base) + " not positive at index " +
                                std::to_string(i));
            pw[i] = std::pow(base, x[2]);
            dpw2[i] = x[2] * std::pow(base, x[2] - 1.0) * (d.inflow[i] - d.outflow[i]);
            dpw3[i] = pw[i] * std::log(base);
        }

        double f = 0.0;
        g[0] = g[1] = g[2] = 0.0;
        for (std::size_t i = 0; i + 1 < T; ++i) {
            const double r = c1 * x[0] * (pw[i + 1] - pw[i]) - c2 * (d.inflow[i] - d.outflow[i]) +
                             c3 * (d.inflow[i + 1] - d.outflow[i + 1]);
            f += r * r;
            g[0] += 2.0 * r * c1 * (pw[i + 1] - pw[i]);
            g[1] += 2.0 * r * c1 * x[0] * (dpw2[i + 1] - dpw2[i]);
            g[2] += 2.0 * r * c1 * x[0] * (dpw3[i + 1] - dpw3[i]);
        }
        return f;
    });
}

} // namespace qnopt
