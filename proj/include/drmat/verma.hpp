#pragma once

// Truncated Verma modules.  The combinatorial skeleton (PBW monomials in
// the f's, graded by the positive root lattice and truncated by height) is
// independent of the highest weight; only e- and h-actions see mu.
//
// A monomial is a multiset of positive-root indices stored sorted by a PBW
// order.  Normal ordering is bubble-style: swap an adjacent inversion and
// add the bracket contraction; (length, #inversions) decreases, so the
// rewriting terminates.  Two different PBW orders give the independent
// evaluation paths used by the trace oracle tests.

#include <algorithm>
#include <functional>

#include "drmat/sampling.hpp"
#include "drmat/series.hpp"

namespace drmat {

using Monomial = std::vector<int>; // positive-root indices, sorted by order rank
using UElem = std::map<Monomial, cplx>;

struct PbwOrder {
    std::vector<int> rank; // root index -> sort key
    bool less(int a, int b) const { return rank[a] < rank[b]; }
};

inline PbwOrder default_pbw(const LieAlgebra& g) {
    PbwOrder o;
    o.rank.resize(g.num_pos);
    for (int i = 0; i < g.num_pos; ++i) o.rank[i] = i;
    return o;
}

inline PbwOrder reversed_pbw(const LieAlgebra& g) {
    PbwOrder o;
    o.rank.resize(g.num_pos);
    for (int i = 0; i < g.num_pos; ++i) o.rank[i] = g.num_pos - 1 - i;
    return o;
}

// weights in h* are complex vectors over the simple-root basis
using Weight = std::vector<cplx>;

inline Weight weight_from_lattice(const Lattice& b) {
    Weight w(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) w[i] = static_cast<double>(b[i]);
    return w;
}

inline Weight weight_add(const Weight& a, const Weight& b, cplx scale_b = 1.0) {
    Weight c = a;
    for (std::size_t i = 0; i < b.size(); ++i) c[i] += scale_b * b[i];
    return c;
}

inline cplx weight_pairing(const LieAlgebra& g, const Weight& a, const Weight& b) {
    cplx s = 0;
    for (int i = 0; i < g.rank; ++i) {
        if (a[i] == cplx(0)) continue;
        for (int j = 0; j < g.rank; ++j)
            if (b[j] != cplx(0)) s += a[i] * b[j] * to_double(g.roots.gram[i][j]);
    }
    return s;
}

// <kappa, y> for y in coroot coordinates (complex)
inline cplx weight_on_h(const LieAlgebra& g, const Weight& kappa, const std::vector<cplx>& y) {
    cplx s = 0;
    for (int i = 0; i < g.rank; ++i) {
        if (y[i] == cplx(0)) continue;
        cplx p = 0;
        for (int j = 0; j < g.rank; ++j)
            p += kappa[j] * static_cast<double>(g.cartan.a[i][j]);
        s += y[i] * p;
    }
    return s;
}

// kappa^sharp in complex coroot coordinates
inline std::vector<cplx> weight_sharp(const LieAlgebra& g, const Weight& kappa) {
    std::vector<cplx> c(g.rank);
    for (int j = 0; j < g.rank; ++j) c[j] = kappa[j] * to_double(g.cartan.d[j]);
    return c;
}

inline Weight rho_weight(const LieAlgebra& g) {
    Weight w(g.rank);
    for (int i = 0; i < g.rank; ++i) w[i] = to_double(g.rho[i]);
    return w;
}

// Delta_kappa = (kappa, kappa + 2 rho)
inline cplx casimir_scalar(const LieAlgebra& g, const Weight& kappa) {
    Weight k2 = weight_add(kappa, rho_weight(g), 2.0);
    return weight_pairing(g, kappa, k2);
}

struct VermaSkeleton {
    const LieAlgebra* alg = nullptr;
    PbwOrder order;
    int cap = 0;
    std::vector<Lattice> block_keys;
    std::map<Lattice, std::vector<Monomial>> blocks;
    std::map<Monomial, int> pos_in_block;

    const std::vector<Monomial>& block(const Lattice& beta) const {
        static const std::vector<Monomial> empty;
        auto it = blocks.find(beta);
        return it == blocks.end() ? empty : it->second;
    }
    int block_dim(const Lattice& beta) const { return static_cast<int>(block(beta).size()); }
};

inline int monomial_height(const LieAlgebra& g, const Monomial& m) {
    int h = 0;
    for (int r : m) h += g.roots.heights[r];
    return h;
}

inline Lattice monomial_weight(const LieAlgebra& g, const Monomial& m) {
    Lattice b(g.rank, 0);
    for (int r : m)
        for (int k = 0; k < g.rank; ++k) b[k] += g.roots.positive[r][k];
    return b;
}

inline VermaSkeleton build_verma_skeleton(const LieAlgebra& g, int cap,
                                          PbwOrder order) {
    if (cap > 8) throw CapExceeded("height cap " + std::to_string(cap) + " > 8");
    VermaSkeleton sk;
    sk.alg = &g;
    sk.order = order;
    sk.cap = cap;
    // enumerate multisets of roots by order rank, heights <= cap
    std::vector<int> roots_by_rank(g.num_pos);
    for (int i = 0; i < g.num_pos; ++i) roots_by_rank[order.rank[i]] = i;
    Monomial cur;
    std::function<void(int, int)> rec = [&](int rank_pos, int height) {
        sk.blocks[monomial_weight(g, cur)].push_back(cur);
        if (rank_pos >= g.num_pos) return;
        for (int rp = rank_pos; rp < g.num_pos; ++rp) {
            int root = roots_by_rank[rp];
            int h = g.roots.heights[root];
            if (height + h > cap) continue;
            cur.push_back(root);
            rec(rp, height + h);
            cur.pop_back();
        }
    };
    rec(0, 0);
    for (auto& [key, monos] : sk.blocks) {
        std::sort(monos.begin(), monos.end());
        sk.block_keys.push_back(key);
        for (std::size_t i = 0; i < monos.size(); ++i)
            sk.pos_in_block[monos[i]] = static_cast<int>(i);
    }
    return sk;
}

// ---- straightening ------------------------------------------------------

// Normal order an arbitrary word of f-letters (with coefficient), returning
// PBW monomials.  Words whose height exceeds `cap` are dropped.
inline UElem normal_order(const LieAlgebra& g, const PbwOrder& order,
                          const Monomial& word, cplx coef, int cap) {
    UElem out;
    std::vector<std::pair<Monomial, cplx>> work{{word, coef}};
    while (!work.empty()) {
        auto [w, c] = work.back();
        work.pop_back();
        if (monomial_height(g, w) > cap) continue;
        std::size_t inv = w.size();
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            if (order.rank[w[i]] > order.rank[w[i + 1]]) {
                inv = i;
                break;
            }
        if (inv == w.size()) {
            out[w] += c;
            if (out[w] == cplx(0)) out.erase(w);
            continue;
        }
        Monomial swapped = w;
        std::swap(swapped[inv], swapped[inv + 1]);
        work.emplace_back(std::move(swapped), c);
        // bracket contraction [f_a, f_b] (pure f-combination)
        for (auto& [idx, n] : g.bracket_basis(g.f_index(w[inv]), g.f_index(w[inv + 1]))) {
            Monomial contracted;
            contracted.reserve(w.size() - 1);
            for (std::size_t k = 0; k < w.size(); ++k) {
                if (k == inv) contracted.push_back(g.root_of_f(idx));
                else if (k != inv + 1) contracted.push_back(w[k]);
            }
            work.emplace_back(std::move(contracted), c * to_double(n));
        }
    }
    return out;
}

// left-multiply by f_root
inline UElem act_f(const LieAlgebra& g, const PbwOrder& order, int root,
                   const UElem& v, int cap) {
    UElem out;
    for (auto& [m, c] : v) {
        Monomial word;
        word.reserve(m.size() + 1);
        word.push_back(root);
        word.insert(word.end(), m.begin(), m.end());
        for (auto& [m2, c2] : normal_order(g, order, word, c, cap)) {
            out[m2] += c2;
            if (out[m2] == cplx(0)) out.erase(m2);
        }
    }
    return out;
}

// h-action on M_mu: y in coroot coordinates acts on the block of m by
// <mu - wt(m), y>.
inline UElem act_h(const LieAlgebra& g, const Weight& mu, const std::vector<cplx>& y,
                   const UElem& v) {
    UElem out;
    for (auto& [m, c] : v) {
        Weight k = weight_add(mu, weight_from_lattice(monomial_weight(g, m)), -1.0);
        cplx s = weight_on_h(g, k, y);
        if (s != cplx(0)) out[m] = c * s;
    }
    return out;
}

// e_i action on M_mu (simple root i): e_i f_{m0} rest
//   = f_{m0} (e_i rest) + [e_i, f_{m0}] rest, the bracket being an h or an f.
inline UElem act_e_simple(const LieAlgebra& g, const PbwOrder& order, int i,
                          const Weight& mu, const UElem& v, int cap) {
    UElem out;
    auto accum = [&out](const UElem& u) {
        for (auto& [m, c] : u) {
            out[m] += c;
            if (out[m] == cplx(0)) out.erase(m);
        }
    };
    int root_i = -1;
    {
        RootVec a(g.rank, 0);
        a[i] = 1;
        root_i = g.roots.index_of_root.at(a);
    }
    for (auto& [m, c] : v) {
        if (m.empty()) continue; // e_i v_mu = 0
        Monomial rest(m.begin() + 1, m.end());
        UElem inner = act_e_simple(g, order, i, mu, UElem{{rest, c}}, cap);
        if (!inner.empty()) accum(act_f(g, order, m[0], inner, cap));
        for (auto& [idx, n] : g.bracket_basis(g.e_index(root_i), g.f_index(m[0]))) {
            if (g.is_h(idx)) {
                std::vector<cplx> y(g.rank, 0.0);
                y[g.cartan_of_h(idx)] = to_double(n);
                accum(act_h(g, mu, y, UElem{{rest, c}}));
            } else if (g.is_f(idx)) {
                accum(act_f(g, order, g.root_of_f(idx), UElem{{rest, c * to_double(n)}},
                            cap));
            }
        }
    }
    return out;
}

// e_alpha for a composite positive root, through the extraspecial tree:
// e_gamma = [e_a, e_b] / N(a,b).
inline UElem act_e(const LieAlgebra& g, const PbwOrder& order, int root,
                   const Weight& mu, const UElem& v, int cap) {
    if (g.roots.heights[root] == 1) {
        int i = -1;
        for (int k = 0; k < g.rank; ++k)
            if (g.roots.positive[root][k] == 1) i = k;
        return act_e_simple(g, order, i, mu, v, cap);
    }
    auto [a, b] = g.extraspecial[root];
    Rat n = g.npos.at({a, b});
    UElem ab = act_e(g, order, a, mu, act_e(g, order, b, mu, v, cap), cap);
    UElem ba = act_e(g, order, b, mu, act_e(g, order, a, mu, v, cap), cap);
    UElem out = ab;
    for (auto& [m, c] : ba) {
        out[m] -= c;
        if (out[m] == cplx(0)) out.erase(m);
    }
    for (auto& [m, c] : out) c /= to_double(n);
    return out;
}

// quadratic Casimir C = 2 rho^sharp + sum_j x_j^2 + 2 sum_a f_a e_a on M_mu
inline UElem act_casimir(const LieAlgebra& g, const PbwOrder& order, const Weight& mu,
                         const UElem& v, int cap) {
    UElem out;
    Weight rho = rho_weight(g);
    for (auto& [m, c] : v) {
        Weight k = weight_add(mu, weight_from_lattice(monomial_weight(g, m)), -1.0);
        cplx s = weight_pairing(g, k, k) + 2.0 * weight_pairing(g, k, rho);
        out[m] += s * c;
    }
    for (int a = 0; a < g.num_pos; ++a) {
        UElem ev = act_e(g, order, a, mu, v, cap);
        if (ev.empty()) continue;
        for (auto& [m, c] : act_f(g, order, a, ev, cap)) {
            out[m] += 2.0 * c;
            if (out[m] == cplx(0)) out.erase(m);
        }
    }
    return out;
}

// ---- twist operator on Verma modules ------------------------------------

// B(x v_mu') = B(x) v_mu on PBW monomials; zero when a letter dies.
inline UElem twist_monomial(const TripleAnalysis& an, const VermaSkeleton& sk,
                            const Monomial& m) {
    const LieAlgebra& g = *sk.alg;
    Monomial image;
    Rat coef(1);
    for (int r : m) {
        auto it = an.b_f_image.find(r);
        if (it == an.b_f_image.end()) return {};
        image.push_back(it->second.first);
        coef *= it->second.second;
    }
    return normal_order(g, sk.order, image, to_cplx(coef), sk.cap);
}

inline UElem twist_apply(const TripleAnalysis& an, const VermaSkeleton& sk,
                         const UElem& v) {
    UElem out;
    for (auto& [m, c] : v)
        for (auto& [m2, c2] : twist_monomial(an, sk, m)) {
            out[m2] += c * c2;
            if (out[m2] == cplx(0)) out.erase(m2);
        }
    return out;
}

// ---- weight constraint ----------------------------------------------------

struct WeightConstraintSolution {
    Weight nu;
    Weight xi;
    Weight mu;
    double residual = 0;
};

// mu = (1 + C_T)/2 nu + xi with nu in l-perp and xi in l*.
inline WeightConstraintSolution solve_weight_constraint(const TripleAnalysis& an,
                                                        const Weight& nu,
                                                        const Weight& xi) {
    const LieAlgebra& g = *an.alg;
    // check nu in l-perp: P_l(nu^sharp) = 0
    std::vector<cplx> nus = weight_sharp(g, nu);
    double perp = 0;
    for (int i = 0; i < g.rank; ++i) {
        cplx s = 0;
        for (int j = 0; j < g.rank; ++j) s += to_double(an.proj_l[i][j]) * nus[j];
        perp = std::max(perp, std::abs(s));
    }
    if (perp > 1e-12) throw NuNotPerp("P_l(nu) has norm " + std::to_string(perp));
    // (1 + C_T)/2 nu^sharp, then flat back to alpha-coordinates
    std::vector<cplx> img(g.rank, 0.0);
    for (int i = 0; i < g.rank; ++i) {
        img[i] = 0.5 * nus[i];
        for (int j = 0; j < g.rank; ++j)
            img[i] += 0.5 * to_double(an.cayley_h[i][j]) * nus[j];
    }
    WeightConstraintSolution sol;
    sol.nu = nu;
    sol.xi = xi;
    sol.mu.assign(g.rank, 0.0);
    for (int i = 0; i < g.rank; ++i)
        sol.mu[i] = img[i] / to_double(g.cartan.d[i]) + xi[i]; // flat is diagonal
    // verify (mu - nu, alpha) = (mu, T alpha) on Gamma1
    for (int i : an.gamma1) {
        int ti = an.spec.t_map.at(i);
        Weight ai(g.rank, 0.0), ati(g.rank, 0.0);
        ai[i] = 1.0;
        ati[ti] = 1.0;
        cplx lhs = weight_pairing(g, weight_add(sol.mu, nu, -1.0), ai);
        cplx rhs = weight_pairing(g, sol.mu, ati);
        sol.residual = std::max(sol.residual, std::abs(lhs - rhs));
    }
    if (sol.residual > 1e-10)
        throw WeightConstraintViolated("residual " + std::to_string(sol.residual));
    return sol;
}

} // namespace drmat
