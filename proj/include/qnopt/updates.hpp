#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnopt/core.hpp"

namespace qnopt {

/// Diagonal Hessian approximation B = diag(b). Entries are stored as
/// updated; `eps_b` only enters when a search direction is formed.
struct DiagonalHessian {
    Vector b;
    double eps_b = 1e-6;

    static DiagonalHessian scaled_identity(std::size_t n, double value, double eps_b = 1e-6) {
        return {Vector(n, value), eps_b};
    }
    std::size_t dim() const noexcept { return b.size(); }
};

/// Symmetric n x n matrix, row-major.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n, double diag = 0.0) : n_(n), data_(n * n, 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            (*this)(i, i) = diag;
    }

    static DenseMatrix identity(std::size_t n) { return DenseMatrix(n, 1.0); }

    std::size_t dim() const noexcept { return n_; }
    double &operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }

    Vector multiply(std::span<const double> v) const {
        detail::require_same_size(v.size(), n_, "DenseMatrix::multiply");
        Vector out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            out[i] = dot(row(i), v);
        return out;
    }

    bool all_finite() const { return qnopt::all_finite(data_); }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

using DenseHessian = DenseMatrix;

/// Scalar Y3 of the modified secant condition:
///   [2 (f_prev - f_curr) + (g_curr + g_prev)'s] / |s|^2.
/// Vanishes on quadratics. Throws ZeroStep when |s| <= eps_s.
inline double y3_scalar(double f_prev, double f_curr, std::span<const double> g_prev,
                        std::span<const double> g_curr, std::span<const double> s, double eps_s = 0.0) {
    detail::require_same_size(g_prev.size(), s.size(), "y3_scalar");
    detail::require_same_size(g_curr.size(), s.size(), "y3_scalar");
    const double ss = dot(s, s);
    if (!(ss > 0.0) || std::sqrt(ss) <= eps_s)
        throw Error(ErrorCode::ZeroStep, "y3_scalar: step norm below threshold");
    double gs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        gs += (g_curr[i] + g_prev[i]) * s[i];
    return (2.0 * (f_prev - f_curr) + gs) / ss;
}

/// y* = y + y3 s
inline Vector modified_y(std::span<const double> y, double y3, std::span<const double> s) {
    detail::require_same_size(y.size(), s.size(), "modified_y");
    return axpy(y, y3, s);
}

/// In-place diagonal update
///   b_i <- b_i + [(s'y* + s's - s'Bs) / tr(A^2)] s_i^2 - 1,   A = diag(s_i^2),
/// which satisfies the weak secant condition s'B_new s = s'y*.
inline void apply_diagonal_update(DiagonalHessian &h, std::span<const double> s, std::span<const double> y_star,
                                  double eps_s = 0.0) {
    detail::require_same_size(h.b.size(), s.size(), "diagonal_update");
    detail::require_same_size(y_star.size(), s.size(), "diagonal_update");
    double sy = 0.0, ss = 0.0, sbs = 0.0, tr = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double s2 = s[i] * s[i];
        sy += s[i] * y_star[i];
        ss += s2;
        sbs += h.b[i] * s2;
        tr += s2 * s2;
    }
    if (!(ss > 0.0) || std::sqrt(ss) <= eps_s || !(tr > 0.0) || !std::isfinite(tr))
        throw Error(ErrorCode::ZeroStep, "diagonal_update: step norm below threshold");
    const double coef = (sy + ss - sbs) / tr;
    for (std::size_t i = 0; i < s.size(); ++i)
        h.b[i] = h.b[i] + coef * s[i] * s[i] - 1.0;
}

inline DiagonalHessian diagonal_update(DiagonalHessian h, std::span<const double> s, std::span<const double> y_star,
                                       double eps_s = 0.0) {
    apply_diagonal_update(h, s, y_star, eps_s);
    return h;
}

/// Optional stability variant: stored entries are raised to at least eps_b.
inline void clamp_stored(DiagonalHessian &h) {
    for (double &v : h.b)
        v = std::max(v, h.eps_b);
}

/// d_i = -g_i / b_i when b_i >= eps_b, otherwise -g_i.
inline Vector safeguarded_direction(const DiagonalHessian &h, std::span<const double> g) {
    detail::require_same_size(h.b.size(), g.size(), "safeguarded_direction");
    Vector d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        d[i] = h.b[i] >= h.eps_b ? -g[i] / h.b[i] : -g[i];
    return d;
}

inline bool mbfgs3_curvature_ok(std::span<const double> s, std::span<const double> y_star, double eps_curv) {
    const double sy = dot(s, y_star);
    return sy > eps_curv * norm2(s) * norm2(y_star);
}

/// In-place BFGS-type update with the modified gradient difference:
///   B <- B - B s s'B / s'Bs + y* y*' / s'y*.
/// Skipped (returns false) unless s'y* > eps_curv |s| |y*|.
inline bool apply_mbfgs3_update(DenseHessian &B, std::span<const double> s, std::span<const double> y_star,
                                double eps_curv = 1e-12) {
    detail::require_same_size(B.dim(), s.size(), "mbfgs3_full_update");
    detail::require_same_size(y_star.size(), s.size(), "mbfgs3_full_update");
    if (!mbfgs3_curvature_ok(s, y_star, eps_curv))
        return false;
    const Vector bs = B.multiply(s);
    const double sbs = dot(s, bs);
    if (!(sbs > 0.0))
        return false;
    const double sy = dot(s, y_star);
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            B(i, j) += y_star[i] * y_star[j] / sy - bs[i] * bs[j] / sbs;
    return true;
}

inline DenseHessian mbfgs3_full_update(DenseHessian B, std::span<const double> s, std::span<const double> y_star,
                                       double eps_curv = 1e-12) {
    apply_mbfgs3_update(B, s, y_star, eps_curv);
    return B;
}

/// Inverse of the same update, applied to H = B^{-1}:
///   H <- H - (H y* s' + s y*'H) / s'y* + (1 + y*'H y* / s'y*) s s' / s'y*.
/// Uses the same skip rule, so H stays the inverse of the B maintained by
/// apply_mbfgs3_update. Lets the solver form B d = -g in O(n^2).
inline bool apply_mbfgs3_inverse_update(DenseMatrix &H, std::span<const double> s, std::span<const double> y_star,
                                        double eps_curv = 1e-12) {
    detail::require_same_size(H.dim(), s.size(), "mbfgs3_inverse_update");
    detail::require_same_size(y_star.size(), s.size(), "mbfgs3_inverse_update");
    if (!mbfgs3_curvature_ok(s, y_star, eps_curv))
        return false;
    const double sy = dot(s, y_star);
    const Vector hy = H.multiply(y_star);
    const double c = (sy + dot(y_star, hy)) / (sy * sy);
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            H(i, j) += c * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
    return true;
}

} // namespace qnopt
