#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnopt/core.hpp"

namespace qnopt {

/// Fills `g` with the gradient at `x` and returns f(x). Both spans have the
/// problem dimension.
using Evaluator = std::function<double(std::span<const double> x, std::span<double> g)>;

/// An objective with analytic gradient, a dimension and a standard start
/// point. Immutable once constructed and cheap to copy.
class Problem {
public:
    Problem(std::string name, Vector start, Evaluator eval)
        : name_(std::move(name)), start_(std::move(start)),
          eval_(std::make_shared<const Evaluator>(std::move(eval))) {}

    const std::string &name() const noexcept { return name_; }
    std::size_t dim() const noexcept { return start_.size(); }
    const Vector &start() const noexcept { return start_; }

    /// Raw evaluation, no counting.
    double value_and_gradient(std::span<const double> x, std::span<double> g) const {
        detail::require_same_size(x.size(), dim(), "Problem::value_and_gradient");
        detail::require_same_size(g.size(), dim(), "Problem::value_and_gradient");
        return (*eval_)(x, g);
    }

private:
    std::string name_;
    Vector start_;
    std::shared_ptr<const Evaluator> eval_;
};

/// Per-run evaluation counters. One evaluate() call is one f and one g.
struct EvalCounter {
    std::size_t nf = 0;
    std::size_t ng = 0;

    std::size_t nfg() const noexcept { return nf + ng; }
    void reset() noexcept { nf = ng = 0; }
};

struct Evaluation {
    double f = 0.0;
    Vector g;
};

inline Evaluation evaluate(const Problem &p, std::span<const double> x, EvalCounter &counter) {
    detail::require_same_size(x.size(), p.dim(), "evaluate");
    Evaluation e;
    e.g.assign(p.dim(), 0.0);
    ++counter.nf;
    ++counter.ng;
    e.f = p.value_and_gradient(x, e.g);
    return e;
}

/// Central-difference gradient (f(x + h e_i) - f(x - h e_i)) / 2h.
inline Vector fd_gradient(const Problem &p, std::span<const double> x, double h) {
    detail::require_same_size(x.size(), p.dim(), "fd_gradient");
    if (!(h > 0.0))
        throw Error(ErrorCode::InvalidConfig, "fd_gradient: step must be positive");
    if (!all_finite(x))
        throw Error(ErrorCode::NonFiniteValue, "fd_gradient: non-finite point");
    Vector xp(x.begin(), x.end());
    Vector scratch(p.dim());
    Vector grad(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) {
        const double xi = xp[i];
        xp[i] = xi + h;
        const double fp = p.value_and_gradient(xp, scratch);
        xp[i] = xi - h;
        const double fm = p.value_and_gradient(xp, scratch);
        xp[i] = xi;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw Error(ErrorCode::NonFiniteValue,
                        "fd_gradient: objective not finite near component " + std::to_string(i));
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

// Test problems from Andrei's unconstrained optimization collection. Indices
// in the comments are 1-based as in the literature.
namespace catalogue {

inline void require_even(const std::string &name, std::size_t n) {
    if (n == 0 || n % 2 != 0)
        throw Error(ErrorCode::IncompatibleDimension, name + " needs an even dimension, got " + std::to_string(n));
}

inline void require_at_least(const std::string &name, std::size_t n, std::size_t lo) {
    if (n < lo)
        throw Error(ErrorCode::IncompatibleDimension,
                    name + " needs dimension >= " + std::to_string(lo) + ", got " + std::to_string(n));
}

inline Problem ext_rosenbrock(std::size_t n) {
    require_even("ext_rosenbrock", n);
    Vector x0(n);
    for (std::size_t i = 0; i < n; i += 2) {
        x0[i] = -1.2;
        x0[i + 1] = 1.0;
    }
    return Problem("ext_rosenbrock", std::move(x0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); i += 2) {
            const double a = x[i], b = x[i + 1];
            const double t = b - a * a;
            f += 100.0 * t * t + (1.0 - a) * (1.0 - a);
            g[i] = -400.0 * t * a - 2.0 * (1.0 - a);
            g[i + 1] = 200.0 * t;
        }
        return f;
    });
}

inline Problem ext_white_holst(std::size_t n) {
    require_even("ext_white_holst", n);
    Vector x0(n);
    for (std::size_t i = 0; i < n; i += 2) {
        x0[i] = -1.2;
        x0[i + 1] = 1.0;
    }
    return Problem("ext_white_holst", std::move(x0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); i += 2) {
            const double a = x[i], b = x[i + 1];
            const double t = b - a * a * a;
            f += 100.0 * t * t + (1.0 - a) * (1.0 - a);
            g[i] = -600.0 * t * a * a - 2.0 * (1.0 - a);
            g[i + 1] = 200.0 * t;
        }
        return f;
    });
}

// sum i x_i^2 + (sum x_i)^2 / 100
inline Problem perturbed_quadratic(std::size_t n) {
    require_at_least("perturbed_quadratic", n, 1);
    return Problem("perturbed_quadratic", Vector(n, 0.5), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0, sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double c = static_cast<double>(i + 1);
            f += c * x[i] * x[i];
            sum += x[i];
        }
        f += sum * sum / 100.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = 2.0 * static_cast<double>(i + 1) * x[i] + sum / 50.0;
        return f;
    });
}

inline Problem raydan1(std::size_t n) {
    require_at_least("raydan1", n, 1);
    return Problem("raydan1", Vector(n, 1.0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double c = static_cast<double>(i + 1) / 10.0;
            const double e = std::exp(x[i]);
            f += c * (e - x[i]);
            g[i] = c * (e - 1.0);
        }
        return f;
    });
}

inline Problem raydan2(std::size_t n) {
    require_at_least("raydan2", n, 1);
    return Problem("raydan2", Vector(n, 1.0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = std::exp(x[i]);
            f += e - x[i];
            g[i] = e - 1.0;
        }
        return f;
    });
}

inline Problem diagonal1(std::size_t n) {
    require_at_least("diagonal1", n, 1);
    return Problem("diagonal1", Vector(n, 1.0 / static_cast<double>(n)),
                   [](std::span<const double> x, std::span<double> g) {
                       double f = 0.0;
                       for (std::size_t i = 0; i < x.size(); ++i) {
                           const double c = static_cast<double>(i + 1);
                           const double e = std::exp(x[i]);
                           f += e - c * x[i];
                           g[i] = e - c;
                       }
                       return f;
                   });
}

inline Problem diagonal2(std::size_t n) {
    require_at_least("diagonal2", n, 1);
    Vector x0(n);
    for (std::size_t i = 0; i < n; ++i)
        x0[i] = 1.0 / static_cast<double>(i + 1);
    return Problem("diagonal2", std::move(x0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double c = 1.0 / static_cast<double>(i + 1);
            const double e = std::exp(x[i]);
            f += e - c * x[i];
            g[i] = e - c;
        }
        return f;
    });
}

inline Problem diagonal3(std::size_t n) {
    require_at_least("diagonal3", n, 1);
    return Problem("diagonal3", Vector(n, 1.0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double c = static_cast<double>(i + 1);
            const double e = std::exp(x[i]);
            f += e - c * std::sin(x[i]);
            g[i] = e - c * std::cos(x[i]);
        }
        return f;
    });
}

inline Problem hager(std::size_t n) {
    require_at_least("hager", n, 1);
    return Problem("hager", Vector(n, 1.0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double c = std::sqrt(static_cast<double>(i + 1));
            const double e = std::exp(x[i]);
            f += e - c * x[i];
            g[i] = e - c;
        }
        return f;
    });
}

inline Problem gen_tridiagonal1(std::size_t n) {
    require_at_least("gen_tridiagonal1", n, 2);
    return Problem("gen_tridiagonal1", Vector(n, 2.0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double u = x[i] + x[i + 1] - 3.0;
            const double v = x[i] - x[i + 1] + 1.0;
            f += u * u + v * v * v * v;
            g[i] += 2.0 * u + 4.0 * v * v * v;
            g[i + 1] += 2.0 * u - 4.0 * v * v * v;
        }
        return f;
    });
}

inline Problem ext_tridiagonal1(std::size_t n) {
    require_even("ext_tridiagonal1", n);
    return Problem("ext_tridiagonal1", Vector(n, 2.0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); i += 2) {
            const double u = x[i] + x[i + 1] - 3.0;
            const double v = x[i] - x[i + 1] + 1.0;
            f += u * u + v * v * v * v;
            g[i] = 2.0 * u + 4.0 * v * v * v;
            g[i + 1] = 2.0 * u - 4.0 * v * v * v;
        }
        return f;
    });
}

inline Problem ext_himmelblau(std::size_t n) {
    require_even("ext_himmelblau", n);
    return Problem("ext_himmelblau", Vector(n, 1.0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); i += 2) {
            const double a = x[i], b = x[i + 1];
            const double u = a * a + b - 11.0;
            const double v = a + b * b - 7.0;
            f += u * u + v * v;
            g[i] = 4.0 * a * u + 2.0 * v;
            g[i + 1] = 2.0 * u + 4.0 * b * v;
        }
        return f;
    });
}

// sum_{i<n} (x_i - 1)^2 + (sum x_j^2 - 1/4)^2
inline Problem ext_penalty(std::size_t n) {
    require_at_least("ext_penalty", n, 1);
    Vector x0(n);
    for (std::size_t i = 0; i < n; ++i)
        x0[i] = static_cast<double>(i + 1);
    return Problem("ext_penalty", std::move(x0), [](std::span<const double> x, std::span<double> g) {
        const std::size_t n = x.size();
        double f = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sq += x[i] * x[i];
            if (i + 1 < n)
                f += (x[i] - 1.0) * (x[i] - 1.0);
        }
        const double t = sq - 0.25;
        f += t * t;
        for (std::size_t i = 0; i < n; ++i)
            g[i] = (i + 1 < n ? 2.0 * (x[i] - 1.0) : 0.0) + 4.0 * x[i] * t;
        return f;
    });
}

// 1/2 sum i x_i^2 - x_n
inline Problem quadratic_qf1(std::size_t n) {
    require_at_least("quadratic_qf1", n, 1);
    return Problem("quadratic_qf1", Vector(n, 1.0), [](std::span<const double> x, std::span<double> g) {
        const std::size_t n = x.size();
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = static_cast<double>(i + 1);
            f += 0.5 * c * x[i] * x[i];
            g[i] = c * x[i];
        }
        f -= x[n - 1];
        g[n - 1] -= 1.0;
        return f;
    });
}

inline Problem fletchcr(std::size_t n) {
    require_at_least("fletchcr", n, 2);
    return Problem("fletchcr", Vector(n, 0.0), [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double t = x[i + 1] - x[i] + 1.0 - x[i] * x[i];
            f += 100.0 * t * t;
            g[i] += 200.0 * t * (-1.0 - 2.0 * x[i]);
            g[i + 1] += 200.0 * t;
        }
        return f;
    });
}

// (x_1 - 1)^2 + sum_{i=2}^n 100 (x_1 - x_{i-1}^2)^2
inline Problem nondia(std::size_t n) {
    require_at_least("nondia", n, 2);
    return Problem("nondia", Vector(n, -1.0), [](std::span<const double> x, std::span<double> g) {
        std::fill(g.begin(), g.end(), 0.0);
        double f = (x[0] - 1.0) * (x[0] - 1.0);
        g[0] = 2.0 * (x[0] - 1.0);
        for (std::size_t j = 0; j + 1 < x.size(); ++j) {
            const double t = x[0] - x[j] * x[j];
            f += 100.0 * t * t;
            g[0] += 200.0 * t;
            g[j] -= 400.0 * t * x[j];
        }
        return f;
    });
}

using Factory = Problem (*)(std::size_t);

inline const std::map<std::string, Factory, std::less<>> &registry() {
    static const std::map<std::string, Factory, std::less<>> table = {
        {"diagonal1", &diagonal1},
        {"diagonal2", &diagonal2},
        {"diagonal3", &diagonal3},
        {"ext_himmelblau", &ext_himmelblau},
        {"ext_penalty", &ext_penalty},
        {"ext_rosenbrock", &ext_rosenbrock},
        {"ext_tridiagonal1", &ext_tridiagonal1},
        {"ext_white_holst", &ext_white_holst},
        {"fletchcr", &fletchcr},
        {"gen_tridiagonal1", &gen_tridiagonal1},
        {"hager", &hager},
        {"nondia", &nondia},
        {"perturbed_quadratic", &perturbed_quadratic},
        {"quadratic_qf1", &quadratic_qf1},
        {"raydan1", &raydan1},
        {"raydan2", &raydan2},
    };
    return table;
}

} // namespace catalogue

/// Registered problem identifiers in lexicographic order.
inline std::vector<std::string> problem_names() {
    std::vector<std::string> names;
    for (const auto &[name, factory] : catalogue::registry())
        names.push_back(name);
    return names;
}

inline Problem make_problem(std::string_view name, std::size_t n) {
    const auto &reg = catalogue::registry();
    const auto it = reg.find(name);
    if (it == reg.end())
        throw Error(ErrorCode::UnknownProblem, std::string(name));
    return it->second(n);
}

} // namespace qnopt
