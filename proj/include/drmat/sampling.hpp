#pragma once

// Seeded sampling of dynamical parameters lambda in l* and generic highest
// weights.  Every report records its seed; identical seeds replay
// identically.

#include <random>

#include "drmat/triple.hpp"

namespace drmat {

using Lattice = std::vector<int>;

// A point of l*, stored through the pairings (alpha_i, lambda) with the
// simple roots; (beta, lambda) extends additively.
struct LambdaPoint {
    std::vector<cplx> simple_pairings;

    cplx pair_root(const RootVec& beta) const {
        cplx s = 0;
        for (std::size_t i = 0; i < beta.size(); ++i)
            if (beta[i] != 0) s += static_cast<double>(beta[i]) * simple_pairings[i];
        return s;
    }
    cplx pair_lattice(const Lattice& beta) const {
        cplx s = 0;
        for (std::size_t i = 0; i < beta.size(); ++i)
            if (beta[i] != 0) s += static_cast<double>(beta[i]) * simple_pairings[i];
        return s;
    }
};


inline double pole_margin(const TripleAnalysis& an, const LambdaPoint& lam) {
    double margin = 1e300;
    const LieAlgebra& g = *an.alg;
    for (auto& [a, n] : an.n_table) {
        cplx x = std::exp(-static_cast<double>(n) * lam.pair_root(g.roots.positive[a]));
        margin = std::min(margin, std::abs(1.0 - to_double(an.theta_table.at(a)) * x));
    }
    return margin;
}

// lambda^sharp = t rho^vee + small perturbation inside l, with t chosen so
// Re(alpha_i, lambda) stays in [0.3, 3] and away from poles.
inline LambdaPoint sample_lambda(const TripleAnalysis& an, std::mt19937_64& rng) {
    const LieAlgebra& g = *an.alg;
    std::uniform_real_distribution<double> ut(0.45, 1.6), up(-1.0, 1.0);
    for (int attempt = 0; attempt < 200; ++attempt) {
        double t = ut(rng);
        // lambda^sharp in coroot coordinates
        std::vector<cplx> lam_h(g.rank, 0.0);
        for (int k = 0; k < g.rank; ++k) lam_h[k] = t * to_double(g.rho_check[k]);
        for (const auto& row : an.I1_num) {
            cplx c = 0.12 * t * cplx(up(rng), 0.6 * up(rng));
            for (int k = 0; k < g.rank; ++k) lam_h[k] += c * row[k];
        }
        LambdaPoint lam;
        lam.simple_pairings.assign(g.rank, 0.0);
        bool ok = true;
        for (int i = 0; i < g.rank; ++i) {
            RootVec a(g.rank, 0);
            a[i] = 1;
            cplx p = 0;
            for (int k = 0; k < g.rank; ++k)
                p += lam_h[k] * static_cast<double>(g.cartan_pairing(a, k));
            lam.simple_pairings[i] = p;
            if (p.real() < 0.3 || p.real() > 3.0) ok = false;
        }
        if (!ok) continue;
        if (pole_margin(an, lam) < 1e-4) continue;
        return lam;
    }
    throw Error("sample_lambda: no admissible point found");
}

// lambda from target values of (alpha_i, lambda); caller must supply values
// consistent with membership in l* (constant on T-orbits).
inline LambdaPoint lambda_from_pairings(std::vector<cplx> pairings) {
    LambdaPoint lam;
    lam.simple_pairings = std::move(pairings);
    return lam;
}

inline cplx random_unit_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return cplx(u(rng), u(rng));
}

} // namespace drmat
