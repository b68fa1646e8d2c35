#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "qnopt/core.hpp"
#include "qnopt/problems.hpp"
#include "qnopt/solvers.hpp"

namespace qnopt {

struct ResultRow {
    std::string problem;
    std::size_t dim = 0;
    std::string solver;
    Status status = Status::NumericalBreakdown;
    std::size_t ni = 0;
    std::size_t nfg = 0;
    double cpu = 0.0;
    double f_final = 0.0;
    double gnorm_final = 0.0;

    auto key() const { return std::tie(problem, dim, solver); }
};

struct ResultsTable {
    std::vector<ResultRow> rows;

    void sort_canonical() {
        std::sort(rows.begin(), rows.end(), [](const ResultRow &a, const ResultRow &b) { return a.key() < b.key(); });
    }
};

inline constexpr std::string_view results_csv_header = "problem,dim,solver,status,ni,nfg,cpu,f_final,gnorm_final";

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double_field(std::string_view s, std::size_t line_no) {
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
    return v;
}

inline std::size_t parse_count_field(std::string_view s, std::size_t line_no) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad count '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

template <class T>
std::vector<T> unique_in_order(const std::vector<T> &in) {
    std::vector<T> out;
    for (const T &v : in)
        if (std::find(out.begin(), out.end(), v) == out.end())
            out.push_back(v);
    return out;
}

} // namespace detail

inline void write_results_csv(const ResultsTable &table, std::ostream &out) {
    out << results_csv_header << '\n';
    for (const ResultRow &r : table.rows)
        out << r.problem << ',' << r.dim << ',' << r.solver << ',' << to_string(r.status) << ',' << r.ni << ','
            << r.nfg << ',' << detail::format_double(r.cpu) << ',' << detail::format_double(r.f_final) << ','
            << detail::format_double(r.gnorm_final) << '\n';
}

inline void write_results_csv(const ResultsTable &table, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_results_csv(table, out);
    if (!out)
        throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

inline ResultsTable read_results_csv(std::istream &in) {
    ResultsTable table;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line) || detail::trim(line) != results_csv_header)
        throw Error(ErrorCode::ParseError, "line 1: expected header '" + std::string(results_csv_header) + "'");
    ++line_no;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = detail::trim(line);
        if (row.empty())
            continue;
        const auto f = detail::split(row, ',');
        if (f.size() != 9)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 9 fields");
        ResultRow r;
        r.problem = std::string(f[0]);
        r.dim = detail::parse_count_field(f[1], line_no);
        r.solver = std::string(f[2]);
        r.status = parse_status(f[3]);
        r.ni = detail::parse_count_field(f[4], line_no);
        r.nfg = detail::parse_count_field(f[5], line_no);
        r.cpu = detail::parse_double_field(f[6], line_no);
        r.f_final = detail::parse_double_field(f[7], line_no);
        r.gnorm_final = detail::parse_double_field(f[8], line_no);
        table.rows.push_back(std::move(r));
    }
    return table;
}

inline ResultsTable read_results_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return read_results_csv(in);
}

using RowCallback = std::function<void(const ResultRow &)>;

/// Solves every (problem, dim, solver) cell from the problem's standard
/// start point. Failures are kept as rows. Cells run on `jobs` threads in
/// an order shuffled by `seed`; rows come back sorted by problem, dim, solver.
/// `on_row` is called once per finished cell, serialized.
inline ResultsTable run_suite(const std::vector<std::string> &problems, const std::vector<std::string> &solvers,
                              const std::vector<std::size_t> &dims, const SolverConfig &cfg, std::uint64_t seed = 0,
                              unsigned jobs = 1, const RowCallback &on_row = {}) {
    if (problems.empty() || solvers.empty() || dims.empty())
        throw Error(ErrorCode::EmptyGrid, "problem, solver and dimension lists must be nonempty");
    cfg.validate();

    std::vector<Variant> variants;
    for (const std::string &s : detail::unique_in_order(solvers))
        variants.push_back(parse_variant(s));
    const auto names = detail::unique_in_order(problems);
    const auto sizes = detail::unique_in_order(dims);

    struct Cell {
        std::string problem;
        std::size_t dim;
        Variant variant;
    };
    std::vector<Cell> cells;
    for (const std::string &name : names) {
        for (std::size_t n : sizes) {
            make_problem(name, n); // reject unknown names and bad dimensions up front
            for (Variant v : variants)
                cells.push_back({name, n, v});
        }
    }
    std::mt19937_64 gen(seed);
    std::shuffle(cells.begin(), cells.end(), gen);

    ResultsTable table;
    table.rows.resize(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size())
                return;
            try {
                const Cell &c = cells[i];
                const Problem p = make_problem(c.problem, c.dim);
                SolverConfig local = cfg;
                local.variant = c.variant;
                const SolverReport rep = solve(p, local);
                ResultRow &row = table.rows[i];
                row = {c.problem, c.dim, std::string(to_string(c.variant)), rep.status, rep.iterations,
                       rep.nfg, rep.cpu_seconds, rep.f_final, rep.gnorm_final};
                if (on_row) {
                    std::lock_guard lock(mu);
                    on_row(row);
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure)
                    failure = std::current_exception();
                next = cells.size();
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);

    table.sort_canonical();
    return table;
}

// ---------------------------------------------------------------------------
// Dolan-More performance profiles

enum class Metric { ni, nfg, cpu };

constexpr std::string_view to_string(Metric m) noexcept {
    switch (m) {
    case Metric::ni: return "ni";
    case Metric::nfg: return "nfg";
    case Metric::cpu: return "cpu";
    }
    return "?";
}

inline Metric parse_metric(std::string_view s) {
    for (Metric m : {Metric::ni, Metric::nfg, Metric::cpu})
        if (to_string(m) == s)
            return m;
    throw Error(ErrorCode::InvalidConfig, "unknown metric: " + std::string(s));
}

struct ProfileCurves {
    Metric metric = Metric::ni;
    std::vector<std::string> solvers;
    std::vector<double> taus;
    /// rho[s][t] is the fraction of counted problems with ratio <= taus[t].
    std::vector<std::vector<double>> rho;
    std::size_t problems_counted = 0;
};

/// Metric matrix: rows are problems, columns solvers; +inf marks a failure.
struct MetricMatrix {
    std::vector<std::string> solvers;
    std::vector<std::vector<double>> values;
};

inline double metric_floor(Metric m) { return m == Metric::cpu ? 1e-6 : 1.0; }

inline MetricMatrix metric_matrix(const ResultsTable &t, Metric metric) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::set<std::string> solver_set;
    std::map<std::pair<std::string, std::size_t>, std::map<std::string, double>> cells;
    for (const ResultRow &r : t.rows) {
        solver_set.insert(r.solver);
        double v = inf;
        if (r.status == Status::ConvergedGradNorm) {
            switch (metric) {
            case Metric::ni: v = static_cast<double>(r.ni); break;
            case Metric::nfg: v = static_cast<double>(r.nfg); break;
            case Metric::cpu: v = r.cpu; break;
            }
            v = std::max(v, metric_floor(metric));
        }
        cells[{r.problem, r.dim}][r.solver] = v;
    }
    MetricMatrix m;
    m.solvers.assign(solver_set.begin(), solver_set.end());
    for (const auto &[key, by_solver] : cells) {
        std::vector<double> row;
        for (const std::string &s : m.solvers) {
            const auto it = by_solver.find(s);
            row.push_back(it == by_solver.end() ? inf : it->second);
        }
        m.values.push_back(std::move(row));
    }
    return m;
}

/// Profiles from a metric matrix. Problems no solver solved are dropped;
/// curves are sampled at tau = 1 and at every distinct finite ratio.
inline ProfileCurves performance_profile(const MetricMatrix &m, Metric metric = Metric::ni) {
    if (m.values.empty() || m.solvers.empty())
        throw Error(ErrorCode::NoSolvedProblems, "empty metric matrix");
    const std::size_t ns = m.solvers.size();
    std::vector<std::vector<double>> ratios;
    for (const auto &row : m.values) {
        detail::require_same_size(row.size(), ns, "performance_profile");
        double best = std::numeric_limits<double>::infinity();
        for (double v : row)
            if (std::isfinite(v))
                best = std::min(best, v);
        if (!std::isfinite(best))
            continue;
        std::vector<double> r(ns);
        for (std::size_t s = 0; s < ns; ++s)
            r[s] = std::isfinite(row[s]) ? row[s] / best : std::numeric_limits<double>::infinity();
        ratios.push_back(std::move(r));
    }
    if (ratios.empty())
        throw Error(ErrorCode::NoSolvedProblems, "no problem was solved by any solver");

    ProfileCurves c;
    c.metric = metric;
    c.solvers = m.solvers;
    c.problems_counted = ratios.size();
    std::set<double> taus{1.0};
    for (const auto &r : ratios)
        for (double v : r)
            if (std::isfinite(v))
                taus.insert(v);
    c.taus.assign(taus.begin(), taus.end());

    const double count = static_cast<double>(ratios.size());
    c.rho.assign(ns, std::vector<double>(c.taus.size(), 0.0));
    for (std::size_t s = 0; s < ns; ++s) {
        std::vector<double> mine;
        for (const auto &r : ratios)
            mine.push_back(r[s]);
        std::sort(mine.begin(), mine.end());
        std::size_t solved = 0;
        for (std::size_t t = 0; t < c.taus.size(); ++t) {
            while (solved < mine.size() && mine[solved] <= c.taus[t])
                ++solved;
            c.rho[s][t] = static_cast<double>(solved) / count;
        }
    }
    return c;
}

inline ProfileCurves performance_profile(const ResultsTable &t, Metric metric) {
    if (t.rows.empty())
        throw Error(ErrorCode::NoSolvedProblems, "results table is empty");
    return performance_profile(metric_matrix(t, metric), metric);
}

inline void write_profile_csv(const ProfileCurves &c, std::ostream &out) {
    out << "tau,solver,rho\n";
    for (std::size_t s = 0; s < c.solvers.size(); ++s)
        for (std::size_t t = 0; t < c.taus.size(); ++t)
            out << detail::format_double(c.taus[t]) << ',' << c.solvers[s] << ','
                << detail::format_double(c.rho[s][t]) << '\n';
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

} // namespace detail

inline void write_profile_svg(const ProfileCurves &c, std::ostream &out) {
    constexpr double width = 640, height = 420;
    constexpr double left = 60, right = 150, top = 40, bottom = 50;
    constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
    static constexpr const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    const double tau_max = std::max(c.taus.empty() ? 1.0 : c.taus.back(), 1.0) * 1.05 + 1e-9;
    auto px = [&](double tau) { return left + (tau - 1.0) / (tau_max - 1.0) * plot_w; };
    auto py = [&](double rho) { return top + (1.0 - rho) * plot_h; };
    std::ostringstream num;
    auto fmt = [&](double v) {
        num.str("");
        num.precision(6);
        num << v;
        return num.str();
    };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">Performance profile ("
        << to_string(c.metric) << ", " << c.problems_counted << " problems)</text>\n";

    // Axes and ticks.
    out << "<g stroke=\"black\" stroke-width=\"1\">\n"
        << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\"/>\n</g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double rho = i / 5.0;
        out << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(rho) + 4) << "\" text-anchor=\"end\">" << fmt(rho)
            << "</text>\n";
        const double tau = 1.0 + (tau_max - 1.0) * i / 5.0;
        out << "<text x=\"" << fmt(px(tau)) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
            << fmt(tau) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\">tau</text>\n"
        << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 " << top + plot_h / 2
        << ")\" text-anchor=\"middle\">fraction of problems</text>\n</g>\n";

    for (std::size_t s = 0; s < c.solvers.size(); ++s) {
        const char *color = palette[s % std::size(palette)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        double prev = 0.0;
        for (std::size_t t = 0; t < c.taus.size(); ++t) {
            const double x = px(c.taus[t]);
            out << fmt(x) << ',' << fmt(py(prev)) << ' ' << fmt(x) << ',' << fmt(py(c.rho[s][t])) << ' ';
            prev = c.rho[s][t];
        }
        out << fmt(left + plot_w) << ',' << fmt(py(prev)) << "\"/>\n";

        const double ly = top + 10 + 20.0 * static_cast<double>(s);
        out << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 40
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << left + plot_w + 46 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(c.solvers[s]) << "</text>\n";
    }
    out << "</svg>\n";
}

/// Writes the SVG step plot to `path` and the curve samples to the sibling
/// file with extension .csv.
inline void emit_profile_svg(const ProfileCurves &c, const std::filesystem::path &path) {
    std::filesystem::path csv_path = path;
    csv_path.replace_extension(".csv");
    {
        std::ofstream svg(path);
        if (!svg)
            throw Error(ErrorCode::IoError, "cannot write " + path.string());
        write_profile_svg(c, svg);
        if (!svg)
            throw Error(ErrorCode::IoError, "write failed: " + path.string());
    }
    std::ofstream csv(csv_path);
    if (!csv)
        throw Error(ErrorCode::IoError, "cannot write " + csv_path.string());
    write_profile_csv(c, csv);
    if (!csv)
        throw Error(ErrorCode::IoError, "write failed: " + csv_path.string());
}

} // namespace qnopt
