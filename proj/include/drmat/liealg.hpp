#pragma once

// Finite-type simple Lie algebra on an explicit basis
//
//     { e_a : a in Delta+ }  u  { h_i : i = 1..rank }  u  { f_a : a in Delta+ }
//
// with exact rational structure constants and invariant form.  Chevalley
// signs are fixed by the extraspecial-pair convention: order positive roots
// by (height, lex); for each non-simple gamma the extraspecial pair is the
// decomposition gamma = a + b (a < b, both roots) with minimal a, and
// [x_a, x_b] = (p+1) x_gamma on it, p the length of the descending a-string
// through b.  All remaining constants follow from the standard relations
//
//   N(b,a) = -N(a,b),   N(-a,-b) = -N(a,b),
//   a+b+c = 0        =>  N(a,b)/|c|^2 = N(b,c)/|a|^2 = N(c,a)/|b|^2,
//   a+b+c+d = 0      =>  N(a,b)N(c,d)/|a+b|^2 + N(b,c)N(a,d)/|b+c|^2
//                          + N(c,a)N(b,d)/|c+a|^2 = 0  (no two opposite).
//
// Root vectors are normalized so (e_a, f_a) = 1 for every positive root:
// e_a is the Chevalley vector x_a and f_a = (|a|^2/2) x_{-a}.  Consequently
// [e_a, f_a] = a^sharp, the image of a under the form's identification of
// h* with h.  Index order of the basis (e's by height then lex, h's, f's
// mirrored) is part of the output contract.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "drmat/rootsystem.hpp"

namespace drmat {

struct LieAlgebra {
    CartanDatum cartan;
    RootSystem roots;
    int rank = 0;
    int num_pos = 0; // |Delta+|
    int dim = 0;     // rank + 2 |Delta+|

    // Chevalley N(a,b) for positive-root index pairs with root sum
    std::map<std::pair<int, int>, Rat> npos;
    // extraspecial decomposition gamma = a + b for non-simple roots
    std::vector<std::pair<int, int>> extraspecial; // (-1,-1) for simples

    // exact bracket and form tables over the full basis
    std::vector<std::vector<std::vector<std::pair<int, Rat>>>> bracket_tab;
    RatMat form;

    RatVec rho;       // alpha-coordinates of the Weyl vector, (rho, h_i) = 1
    RatVec rho_check; // coroot-coordinates of rho^vee: <alpha_i, rho^vee> = 1

    // ---- basis indexing ------------------------------------------------
    int e_index(int root_idx) const { return root_idx; }
    int h_index(int i) const { return num_pos + i; }
    int f_index(int root_idx) const { return num_pos + rank + (num_pos - 1 - root_idx); }

    bool is_e(int idx) const { return idx < num_pos; }
    bool is_h(int idx) const { return idx >= num_pos && idx < num_pos + rank; }
    bool is_f(int idx) const { return idx >= num_pos + rank; }
    int root_of_e(int idx) const { return idx; }
    int root_of_f(int idx) const { return num_pos - 1 - (idx - num_pos - rank); }
    int cartan_of_h(int idx) const { return idx - num_pos; }

    // weight of a basis vector as a root-lattice vector (zero for h's)
    RootVec weight_of_basis(int idx) const {
        RootVec w(rank, 0);
        if (is_e(idx)) return roots.positive[root_of_e(idx)];
        if (is_f(idx)) {
            w = roots.positive[root_of_f(idx)];
            for (int& x : w) x = -x;
        }
        return w;
    }

    // ---- pairings and musical maps --------------------------------------
    Rat len2(int root_idx) const {
        return roots.pairing(roots.positive[root_idx], roots.positive[root_idx]);
    }

    // <beta, h_i> for a root-lattice vector beta
    long long cartan_pairing(const RootVec& beta, int i) const {
        long long s = 0;
        for (int j = 0; j < rank; ++j) s += static_cast<long long>(beta[j]) * cartan.a[i][j];
        return s;
    }

    // beta^sharp in coroot coordinates (diagonal: multiply by d)
    RatVec sharp(const RootVec& beta) const {
        RatVec c(rank);
        for (int j = 0; j < rank; ++j) c[j] = Rat(beta[j]) * cartan.d[j];
        return c;
    }

    // form on h in coroot coordinates: (h_i, h_j) = a_ij / d_j
    Rat form_h(const RatVec& y1, const RatVec& y2) const {
        Rat s(0);
        for (int i = 0; i < rank; ++i) {
            if (y1[i] == Rat(0)) continue;
            for (int j = 0; j < rank; ++j)
                if (y2[j] != Rat(0)) s += y1[i] * y2[j] * Rat(cartan.a[i][j]) / cartan.d[j];
        }
        return s;
    }

    // ---- brackets --------------------------------------------------------
    const std::vector<std::pair<int, Rat>>& bracket_basis(int i, int j) const {
        return bracket_tab[i][j];
    }

    // N for [x_a, x_{-b}], a != b positive-root indices with a - b a root;
    // reduces to the positive table through the cyclic relation.
    Rat n_mixed(int ia, int ib) const {
        RootVec diff = roots.positive[ia];
        for (int k = 0; k < rank; ++k) diff[k] -= roots.positive[ib][k];
        auto it = roots.index_of_root.find(diff);
        if (it != roots.index_of_root.end()) {
            int k = it->second; // diff = nu in Delta+, pair (b, nu) sums to a
            auto n = npos.find({ib, k});
            if (n == npos.end()) return Rat(0);
            return -roots.pairing(diff, diff) * n->second / len2(ia);
        }
        RootVec neg(rank);
        for (int k = 0; k < rank; ++k) neg[k] = -diff[k];
        it = roots.index_of_root.find(neg);
        if (it != roots.index_of_root.end()) {
            int k = it->second; // nu' = b - a, pair (nu', a) sums to b
            auto n = npos.find({k, ia});
            if (n == npos.end()) return Rat(0);
            return roots.pairing(neg, neg) * n->second / len2(ib);
        }
        return Rat(0);
    }
};

namespace detail {

inline void fill_structure_constants(LieAlgebra& g) {
    const RootSystem& rs = g.roots;
    g.extraspecial.assign(g.num_pos, {-1, -1});
    for (int ig = 0; ig < g.num_pos; ++ig) {
        const RootVec& gamma = rs.positive[ig];
        if (rs.heights[ig] < 2) continue;
        // special pairs (a,b), a < b, a + b = gamma, scanned in order
        std::vector<std::pair<int, int>> specials;
        for (int ia = 0; ia < g.num_pos; ++ia) {
            RootVec rem(g.rank);
            bool ok = true;
            for (int k = 0; k < g.rank; ++k) {
                rem[k] = gamma[k] - rs.positive[ia][k];
                if (rem[k] < 0) ok = false;
            }
            if (!ok) continue;
            auto it = rs.index_of_root.find(rem);
            if (it == rs.index_of_root.end()) continue;
            int ib = it->second;
            if (ia < ib) specials.emplace_back(ia, ib);
        }
        auto [ia1, ib1] = specials.front();
        g.extraspecial[ig] = {ia1, ib1};
        // p = descending a1-string length through b1
        int p = 0;
        {
            RootVec down = rs.positive[ib1];
            for (;;) {
                for (int k = 0; k < g.rank; ++k) down[k] -= rs.positive[ia1][k];
                if (!rs.is_root(down)) break;
                ++p;
            }
        }
        Rat n_es(p + 1);
        g.npos[{ia1, ib1}] = n_es;
        g.npos[{ib1, ia1}] = -n_es;
        Rat glen = rs.pairing(gamma, gamma);
        for (std::size_t s = 1; s < specials.size(); ++s) {
            auto [ia, ib] = specials[s];
            Rat acc(0);
            RootVec d2(g.rank), d3(g.rank);
            for (int k = 0; k < g.rank; ++k) {
                d2[k] = rs.positive[ib1][k] - rs.positive[ia][k];
                d3[k] = rs.positive[ia1][k] - rs.positive[ia][k];
            }
            if (rs.is_root(d2))
                acc += g.n_mixed(ib1, ia) * g.n_mixed(ia1, ib) / rs.pairing(d2, d2);
            if (rs.is_root(d3))
                acc += (-g.n_mixed(ia1, ia)) * g.n_mixed(ib1, ib) / rs.pairing(d3, d3);
            Rat n = glen * acc / n_es;
            g.npos[{ia, ib}] = n;
            g.npos[{ib, ia}] = -n;
        }
    }
}

inline void fill_bracket_table(LieAlgebra& g) {
    const RootSystem& rs = g.roots;
    int dim = g.dim;
    g.bracket_tab.assign(dim, std::vector<std::vector<std::pair<int, Rat>>>(dim));
    auto set = [&](int i, int j, std::vector<std::pair<int, Rat>> v) {
        g.bracket_tab[i][j] = std::move(v);
    };
    auto sharp_combo = [&](const RootVec& beta, const Rat& scale) {
        // scale * beta^sharp expressed over the h-basis
        std::vector<std::pair<int, Rat>> out;
        RatVec c = g.sharp(beta);
        for (int i = 0; i < g.rank; ++i)
            if (c[i] != Rat(0)) out.emplace_back(g.h_index(i), scale * c[i]);
        return out;
    };
    for (int a = 0; a < g.num_pos; ++a) {
        // [h_i, e_a], [h_i, f_a]
        for (int i = 0; i < g.rank; ++i) {
            Rat c(g.cartan_pairing(rs.positive[a], i));
            if (c != Rat(0)) {
                set(g.h_index(i), g.e_index(a), {{g.e_index(a), c}});
                set(g.e_index(a), g.h_index(i), {{g.e_index(a), -c}});
                set(g.h_index(i), g.f_index(a), {{g.f_index(a), -c}});
                set(g.f_index(a), g.h_index(i), {{g.f_index(a), c}});
            }
        }
        // [e_a, f_a] = a^sharp
        set(g.e_index(a), g.f_index(a), sharp_combo(rs.positive[a], Rat(1)));
        set(g.f_index(a), g.e_index(a), sharp_combo(rs.positive[a], Rat(-1)));
        for (int b = 0; b < g.num_pos; ++b) {
            if (b != a) {
                // [e_a, f_b]
                RootVec diff(g.rank);
                for (int k = 0; k < g.rank; ++k)
                    diff[k] = rs.positive[a][k] - rs.positive[b][k];
                if (rs.is_root(diff)) {
                    Rat n = g.n_mixed(a, b) * g.len2(b) / Rat(2);
                    auto it = rs.index_of_root.find(diff);
                    if (it != rs.index_of_root.end()) {
                        set(g.e_index(a), g.f_index(b), {{g.e_index(it->second), n}});
                        set(g.f_index(b), g.e_index(a), {{g.e_index(it->second), -n}});
                    } else {
                        RootVec neg(g.rank);
                        for (int k = 0; k < g.rank; ++k) neg[k] = -diff[k];
                        int id = rs.index_of_root.at(neg);
                        Rat scale = n * Rat(2) / rs.pairing(neg, neg);
                        set(g.e_index(a), g.f_index(b), {{g.f_index(id), scale}});
                        set(g.f_index(b), g.e_index(a), {{g.f_index(id), -scale}});
                    }
                }
            }
            if (a != b) {
                // [e_a, e_b] and [f_a, f_b]
                RootVec sum(g.rank);
                for (int k = 0; k < g.rank; ++k)
                    sum[k] = rs.positive[a][k] + rs.positive[b][k];
                auto it = rs.index_of_root.find(sum);
                if (it != rs.index_of_root.end()) {
                    auto n = g.npos.find({a, b});
                    Rat nab = (n == g.npos.end()) ? Rat(0) : n->second;
                    if (nab != Rat(0)) {
                        int ic = it->second;
                        set(g.e_index(a), g.e_index(b), {{g.e_index(ic), nab}});
                        Rat nf = -nab * g.len2(a) * g.len2(b) /
                                 (Rat(2) * rs.pairing(sum, sum));
                        set(g.f_index(a), g.f_index(b), {{g.f_index(ic), nf}});
                    }
                }
            }
        }
    }
}

inline void fill_form(LieAlgebra& g) {
    g.form = rat_zeros(g.dim, g.dim);
    for (int a = 0; a < g.num_pos; ++a) {
        g.form[g.e_index(a)][g.f_index(a)] = Rat(1);
        g.form[g.f_index(a)][g.e_index(a)] = Rat(1);
    }
    for (int i = 0; i < g.rank; ++i)
        for (int j = 0; j < g.rank; ++j)
            g.form[g.h_index(i)][g.h_index(j)] = Rat(g.cartan.a[i][j]) / g.cartan.d[j];
}

} // namespace detail

inline LieAlgebra build_simple_lie_algebra(const CartanDatum& cartan) {
    LieAlgebra g;
    g.cartan = cartan;
    g.rank = cartan.rank;
    g.roots = build_root_system(cartan);
    g.num_pos = static_cast<int>(g.roots.positive.size());
    g.dim = g.rank + 2 * g.num_pos;
    detail::fill_structure_constants(g);
    detail::fill_bracket_table(g);
    detail::fill_form(g);
    // rho: solve sum_j a_ij rho_j = 1 for all i
    {
        RatMat m(g.rank, RatVec(g.rank));
        RatVec one(g.rank, Rat(1));
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j) m[i][j] = Rat(cartan.a[i][j]);
        g.rho = rat_solve(m, one);
        // rho^vee: <alpha_i, rho^vee> = 1, rho^vee = sum c_j h_j:
        // sum_j c_j a_ji = 1
        RatMat mt(g.rank, RatVec(g.rank));
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j) mt[i][j] = Rat(cartan.a[j][i]);
        g.rho_check = rat_solve(mt, one);
    }
    return g;
}

inline LieAlgebra build_simple_lie_algebra(const std::string& label) {
    return build_simple_lie_algebra(cartan_from_label(label));
}

} // namespace drmat
