// Minimal use of the library: solve Extended Rosenbrock with each method.
#include <cstdio>

#include "qnopt/qnopt.hpp"

int main() {
    const qnopt::Problem p = qnopt::make_problem("ext_rosenbrock", 100);
    for (qnopt::Variant v : qnopt::all_variants) {
        qnopt::SolverConfig cfg;
        cfg.variant = v;
        const qnopt::SolverReport r = qnopt::solve(p, cfg);
        std::printf("%-9s %-18s ni=%-5zu nfg=%-6zu f=%.3e |g|=%.3e\n", std::string(qnopt::to_string(v)).c_str(),
                    std::string(qnopt::to_string(r.status)).c_str(), r.iterations, r.nfg, r.f_final, r.gnorm_final);
    }
}
