#pragma once

// Generalized Belavin-Drinfeld triples (Gamma1, Gamma2, T) and everything
// derived from them: the periodic part Gamma3 with its orbit structure, the
// subspaces l and h0, the Cayley transform C_T, and the twist homomorphism
// B with its return data N_alpha, theta_alpha.
//
// Conventions fixed here:
//  * Gamma3 membership is decided by forward-orbit iteration: i is kept iff
//    iterating T from i stays inside Gamma1 and returns to i.  (T is
//    injective, so an orbit that meets a cycle starts on it.)
//  * B on a composite root vector f_gamma is defined through the fixed
//    extraspecial bracketing word of gamma stored in LieAlgebraData, which
//    makes every theta_alpha deterministic.
//  * l, h0 and C_T are solved exactly over the rationals; the orthonormal
//    bases I1/I2 are the only floating-point artifacts (modified
//    Gram-Schmidt, tolerance 1e-12).

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "drmat/tensor.hpp"

namespace drmat {

struct TripleSpec {
    std::vector<int> gamma1; // simple-root indices (0-based)
    std::vector<int> gamma2;
    std::map<int, int> t_map; // gamma1 -> gamma2
};

inline TripleSpec identity_triple(const LieAlgebra& g) {
    TripleSpec s;
    for (int i = 0; i < g.rank; ++i) {
        s.gamma1.push_back(i);
        s.gamma2.push_back(i);
        s.t_map[i] = i;
    }
    return s;
}

inline void validate_triple(const LieAlgebra& g, const TripleSpec& spec) {
    std::set<int> g1(spec.gamma1.begin(), spec.gamma1.end());
    std::set<int> g2(spec.gamma2.begin(), spec.gamma2.end());
    for (int i : g1)
        if (i < 0 || i >= g.rank) throw NotBijective("index out of range");
    for (int i : g2)
        if (i < 0 || i >= g.rank) throw NotBijective("index out of range");
    if (spec.t_map.size() != g1.size()) throw NotBijective("map domain != gamma1");
    std::set<int> image;
    for (auto& [i, j] : spec.t_map) {
        if (!g1.count(i)) throw NotBijective("map key outside gamma1");
        if (!g2.count(j)) throw NotBijective("map value outside gamma2");
        image.insert(j);
    }
    if (image.size() != g2.size() || g1.size() != g2.size())
        throw NotBijective("T is not a bijection gamma1 -> gamma2");
    // inner product preservation, exactly
    for (auto& [i, ti] : spec.t_map)
        for (auto& [j, tj] : spec.t_map) {
            RootVec a(g.rank, 0), b(g.rank, 0), ta(g.rank, 0), tb(g.rank, 0);
            a[i] = b[j] = ta[ti] = tb[tj] = 1;
            if (g.roots.pairing(a, b) != g.roots.pairing(ta, tb))
                throw NotIsometric("pair (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") changes inner product under T");
        }
}

struct TripleAnalysis {
    const LieAlgebra* alg = nullptr;
    TripleSpec spec;
    std::set<int> gamma1, gamma2, gamma3;
    std::vector<std::vector<int>> orbits; // T-orbits on gamma3 (simple indices)

    RatMat l_basis;  // rows: basis of l in coroot coordinates
    RatMat h0_basis; // rows: basis of h0 in coroot coordinates
    bool nondegenerate = false;
    RatMat cayley;   // C_T on h0 in the h0_basis coordinates
    RatMat proj_l;   // orthogonal projector h -> l, coroot coordinates
    RatMat cayley_h; // C_T o P_{h0} as an endomorphism of h, coroot coordinates

    // B data on root vectors, outputs in the canonical basis
    // b_f_image[a]: B(f_a) = coef * f_{b}, stored as (root index b, coef); absent => 0
    std::map<int, std::pair<int, Rat>> b_f_image;
    std::map<int, std::pair<int, Rat>> binv_e_image; // B^{-1}(e_a)

    // T extended additively to the root lattice of <Gamma1>
    std::map<int, int> t_root;    // positive-root index -> positive-root index
    std::map<int, int> tinv_root; // inverse on <Gamma2>

    std::map<int, int> n_table;     // alpha in <Gamma3> -> N_alpha
    std::map<int, Rat> theta_table; // alpha in <Gamma3> -> theta_alpha

    std::vector<RatVec> I1; // orthonormal basis of l (float values in Rat? no: doubles)
    std::vector<std::vector<double>> I1_num, I2_num;

    int dim_l() const { return static_cast<int>(l_basis.size()); }
    int dim_h0() const { return static_cast<int>(h0_basis.size()); }

    bool in_gamma3_span(int root_idx) const { return n_table.count(root_idx) > 0; }

    // P_l applied to beta^sharp, exact, coroot coordinates
    RatVec project_l_sharp(const RootVec& beta) const {
        return rat_mat_vec(proj_l, alg->sharp(beta));
    }
};

namespace detail {

// orthonormalize rows (double precision) against the h-form
inline std::vector<std::vector<double>> gram_schmidt_h(const LieAlgebra& g,
                                                       const RatMat& basis) {
    auto form = [&](const std::vector<double>& x, const std::vector<double>& y) {
        double s = 0;
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j)
                s += x[i] * y[j] * to_double(g.form[g.h_index(i)][g.h_index(j)]);
        return s;
    };
    std::vector<std::vector<double>> out;
    for (const RatVec& row : basis) {
        std::vector<double> v(g.rank);
        for (int i = 0; i < g.rank; ++i) v[i] = to_double(row[i]);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : out) {
                double c = form(v, u);
                for (int i = 0; i < g.rank; ++i) v[i] -= c * u[i];
            }
        double n = std::sqrt(form(v, v));
        if (n < 1e-12) throw DegenerateTriple("Gram-Schmidt breakdown");
        for (double& x : v) x /= n;
        out.push_back(v);
    }
    return out;
}

} // namespace detail

inline TripleAnalysis analyze_triple(const LieAlgebra& g, const TripleSpec& spec) {
    validate_triple(g, spec);
    TripleAnalysis an;
    an.alg = &g;
    an.spec = spec;
    an.gamma1 = std::set<int>(spec.gamma1.begin(), spec.gamma1.end());
    an.gamma2 = std::set<int>(spec.gamma2.begin(), spec.gamma2.end());

    // Gamma3 by forward-orbit iteration
    for (int i : an.gamma1) {
        int cur = i;
        for (int step = 0; step <= static_cast<int>(an.gamma1.size()); ++step) {
            if (!an.gamma1.count(cur)) break;
            cur = spec.t_map.at(cur);
            if (cur == i) {
                an.gamma3.insert(i);
                break;
            }
        }
    }
    {
        std::set<int> left = an.gamma3;
        while (!left.empty()) {
            int i = *left.begin();
            std::vector<int> orbit;
            int cur = i;
            do {
                orbit.push_back(cur);
                left.erase(cur);
                cur = spec.t_map.at(cur);
            } while (cur != i);
            an.orbits.push_back(orbit);
        }
    }

    // l = span{ (alpha - T alpha)^sharp : alpha in Gamma1 }^perp, exact.
    // Constraint rows on y in coroot coordinates: <alpha_i - alpha_{Ti}, y> = 0.
    {
        RatMat rows;
        for (int i : an.gamma1) {
            int ti = spec.t_map.at(i);
            if (ti == i) continue;
            RootVec diff(g.rank, 0);
            diff[i] += 1;
            diff[ti] -= 1;
            RatVec row(g.rank, Rat(0));
            for (int k = 0; k < g.rank; ++k) row[k] = Rat(g.cartan_pairing(diff, k));
            rows.push_back(row);
        }
        if (rows.empty()) {
            an.l_basis = rat_identity(g.rank);
        } else {
            an.l_basis = rat_kernel(rows);
        }
    }
    // h0 = orthogonal complement of l
    {
        RatMat rows;
        for (const RatVec& l : an.l_basis) {
            RatVec row(g.rank, Rat(0));
            for (int k = 0; k < g.rank; ++k) {
                RatVec ek(g.rank, Rat(0));
                ek[k] = Rat(1);
                row[k] = g.form_h(l, ek);
            }
            rows.push_back(row);
        }
        an.h0_basis = rows.empty() ? rat_identity(g.rank) : rat_kernel(rows);
    }
    // nondegeneracy: Gram of l_basis has full rank
    {
        std::size_t dl = an.l_basis.size();
        RatMat gram(dl, RatVec(dl));
        for (std::size_t i = 0; i < dl; ++i)
            for (std::size_t j = 0; j < dl; ++j)
                gram[i][j] = g.form_h(an.l_basis[i], an.l_basis[j]);
        an.nondegenerate = (dl == 0) || (rat_det(gram) != Rat(0));
    }
    if (an.dim_l() + an.dim_h0() != g.rank)
        throw DegenerateTriple("h != l + h0 (degenerate triple)");

    // orthogonal projector onto l: P = L^T (L G L^T)^{-1} L G  (rows of L = l_basis)
    {
        int n = g.rank;
        int dl = an.dim_l();
        RatMat G(n, RatVec(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G[i][j] = g.form[g.h_index(i)][g.h_index(j)];
        RatMat LG = rat_mat_mul(an.l_basis, G); // dl x n
        RatMat M(dl, RatVec(dl));               // L G L^T
        for (int i = 0; i < dl; ++i)
            for (int j = 0; j < dl; ++j) {
                Rat s(0);
                for (int k = 0; k < n; ++k) s += LG[i][k] * an.l_basis[j][k];
                M[i][j] = s;
            }
        // invert M column by column
        RatMat Minv(dl, RatVec(dl, Rat(0)));
        for (int c = 0; c < dl; ++c) {
            RatVec e(dl, Rat(0));
            e[c] = Rat(1);
            RatVec x = rat_solve(M, e);
            for (int r = 0; r < dl; ++r) Minv[r][c] = x[r];
        }
        // P = L^T Minv LG : n x n
        an.proj_l = rat_zeros(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Rat s(0);
                for (int a = 0; a < dl; ++a)
                    for (int b = 0; b < dl; ++b)
                        s += an.l_basis[a][i] * Minv[a][b] * LG[b][j];
                an.proj_l[i][j] = s;
            }
    }

    // Cayley transform on h0: for x in h0 solve (alpha - T alpha, y) = (alpha + T alpha, x)
    {
        int d0 = an.dim_h0();
        an.cayley = rat_zeros(d0, d0);
        if (d0 > 0) {
            // rows of the linear system: alpha in Gamma1 -> functional on h0-coords
            // (alpha - T alpha, sum_c y_c h0_c)
            std::vector<RatVec> lhs_rows;
            std::vector<RootVec> gamma1_diff, gamma1_sum;
            for (int i : an.gamma1) {
                int ti = spec.t_map.at(i);
                RootVec diff(g.rank, 0), sum(g.rank, 0);
                diff[i] += 1;
                diff[ti] -= 1;
                sum[i] += 1;
                sum[ti] += 1;
                gamma1_diff.push_back(diff);
                gamma1_sum.push_back(sum);
                RatVec row(d0);
                for (int c = 0; c < d0; ++c) {
                    Rat s(0);
                    for (int k = 0; k < g.rank; ++k)
                        s += an.h0_basis[c][k] * Rat(g.cartan_pairing(diff, k));
                    row[c] = s;
                }
                lhs_rows.push_back(row);
            }
            for (int xc = 0; xc < d0; ++xc) {
                RatVec rhs(lhs_rows.size());
                for (std::size_t r = 0; r < lhs_rows.size(); ++r) {
                    Rat s(0);
                    for (int k = 0; k < g.rank; ++k)
                        s += an.h0_basis[xc][k] * Rat(g.cartan_pairing(gamma1_sum[r], k));
                    rhs[r] = s;
                }
                RatMat m = lhs_rows;
                RatVec y = rat_solve(m, rhs);
                for (int r = 0; r < d0; ++r) an.cayley[r][xc] = y[r];
            }
        }
    }

    // T on composite roots of <Gamma1> and the B images with multipliers.
    auto support_in = [&](const RootVec& beta, const std::set<int>& s) {
        for (int k = 0; k < g.rank; ++k)
            if (beta[k] != 0 && !s.count(k)) return false;
        return true;
    };
    for (int a = 0; a < g.num_pos; ++a) {
        const RootVec& beta = g.roots.positive[a];
        if (support_in(beta, an.gamma1)) {
            RootVec img(g.rank, 0);
            for (int k = 0; k < g.rank; ++k)
                if (beta[k] != 0) img[spec.t_map.at(k)] += beta[k];
            auto it = g.roots.index_of_root.find(img);
            if (it != g.roots.index_of_root.end()) an.t_root[a] = it->second;
        }
        if (support_in(beta, an.gamma2)) {
            RootVec img(g.rank, 0);
            std::map<int, int> tinv;
            for (auto& [i, j] : spec.t_map) tinv[j] = i;
            for (int k = 0; k < g.rank; ++k)
                if (beta[k] != 0) img[tinv.at(k)] += beta[k];
            auto it = g.roots.index_of_root.find(img);
            if (it != g.roots.index_of_root.end()) an.tinv_root[a] = it->second;
        }
    }
    // B(f_a) computed along the extraspecial tree; simple generators map with
    // multiplier 1 (dual-normalized f's, T an isometry).
    {
        std::vector<std::optional<std::pair<int, Rat>>> memo(g.num_pos);
        std::vector<bool> known(g.num_pos, false);
        // process by height so constituents are ready
        for (int a = 0; a < g.num_pos; ++a) {
            const RootVec& beta = g.roots.positive[a];
            if (!support_in(beta, an.gamma1)) {
                known[a] = true;
                continue; // B f = 0
            }
            if (g.roots.heights[a] == 1) {
                int i = -1;
                for (int k = 0; k < g.rank; ++k)
                    if (beta[k] == 1) i = k;
                memo[a] = {an.t_root.at(a), Rat(1)};
                (void)i;
                known[a] = true;
                continue;
            }
            auto [ia, ib] = g.extraspecial[a];
            // f_gamma appears in [f_ia, f_ib] = c f_gamma with exact c
            const auto& br = g.bracket_basis(g.f_index(ia), g.f_index(ib));
            Rat c(0);
            for (auto& [idx, v] : br)
                if (idx == g.f_index(a)) c = v;
            if (!memo[ia] || !memo[ib]) {
                known[a] = true; // a constituent dies under B
                continue;
            }
            auto [ta, ca] = *memo[ia];
            auto [tb, cb] = *memo[ib];
            const auto& br2 = g.bracket_basis(g.f_index(ta), g.f_index(tb));
            Rat c2(0);
            int target = an.t_root.at(a);
            for (auto& [idx, v] : br2)
                if (idx == g.f_index(target)) c2 = v;
            if (c2 == Rat(0)) {
                known[a] = true;
                continue;
            }
            memo[a] = {target, ca * cb * c2 / c};
            known[a] = true;
        }
        for (int a = 0; a < g.num_pos; ++a)
            if (memo[a]) an.b_f_image[a] = *memo[a];
    }
    // B^{-1}(e_a) along the same trees with T^{-1} on <Gamma2>
    {
        for (int a = 0; a < g.num_pos; ++a) {
            const RootVec& beta = g.roots.positive[a];
            if (!support_in(beta, an.gamma2)) continue;
            if (!an.tinv_root.count(a)) continue;
            if (g.roots.heights[a] == 1) {
                an.binv_e_image[a] = {an.tinv_root.at(a), Rat(1)};
                continue;
            }
            auto [ia, ib] = g.extraspecial[a];
            auto ita = an.binv_e_image.find(ia);
            auto itb = an.binv_e_image.find(ib);
            if (ita == an.binv_e_image.end() || itb == an.binv_e_image.end()) continue;
            const auto& br = g.bracket_basis(g.e_index(ia), g.e_index(ib));
            Rat c(0);
            for (auto& [idx, v] : br)
                if (idx == g.e_index(a)) c = v;
            const auto& br2 =
                g.bracket_basis(g.e_index(ita->second.first), g.e_index(itb->second.first));
            Rat c2(0);
            int target = an.tinv_root.at(a);
            for (auto& [idx, v] : br2)
                if (idx == g.e_index(target)) c2 = v;
            if (c2 == Rat(0)) continue;
            an.binv_e_image[a] = {target, ita->second.second * itb->second.second * c2 / c};
        }
    }

    // N_alpha and theta_alpha on <Gamma3>: iterate T on the root, multiply
    // the B multipliers around the orbit.
    for (int a = 0; a < g.num_pos; ++a) {
        if (!support_in(g.roots.positive[a], an.gamma3)) continue;
        int cur = a;
        Rat theta(1);
        int n = 0;
        bool cycles = true;
        do {
            auto it = an.b_f_image.find(cur);
            if (it == an.b_f_image.end()) {
                cycles = false;
                break;
            }
            theta *= it->second.second;
            cur = it->second.first;
            ++n;
            if (n > 2 * g.num_pos) {
                cycles = false;
                break;
            }
        } while (cur != a);
        if (cycles) {
            an.n_table[a] = n;
            an.theta_table[a] = theta;
        }
    }

    // C_T o P_{h0} on h in coroot coordinates: project, move to h0
    // coordinates, apply the Cayley matrix, and expand back.
    {
        int n = g.rank, d0 = an.dim_h0();
        an.cayley_h = rat_zeros(n, n);
        if (d0 > 0) {
            RatMat G(n, RatVec(n));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) G[i][j] = g.form[g.h_index(i)][g.h_index(j)];
            RatMat HG = rat_mat_mul(an.h0_basis, G);
            RatMat M(d0, RatVec(d0));
            for (int i = 0; i < d0; ++i)
                for (int j = 0; j < d0; ++j) {
                    Rat s(0);
                    for (int k = 0; k < n; ++k) s += HG[i][k] * an.h0_basis[j][k];
                    M[i][j] = s;
                }
            for (int col = 0; col < n; ++col) {
                RatVec rhs(d0);
                for (int i = 0; i < d0; ++i) rhs[i] = HG[i][col];
                RatVec c = rat_solve(M, rhs);
                RatVec cc = rat_mat_vec(an.cayley, c);
                for (int r = 0; r < d0; ++r)
                    for (int k = 0; k < n; ++k)
                        an.cayley_h[k][col] += cc[r] * an.h0_basis[r][k];
            }
        }
    }

    an.I1_num = detail::gram_schmidt_h(g, an.l_basis);
    an.I2_num = detail::gram_schmidt_h(g, an.h0_basis);
    return an;
}

// Apply C_T to a vector given in h0_basis coordinates.
inline RatVec cayley_transform(const TripleAnalysis& an, const RatVec& x_h0_coords) {
    if (!an.nondegenerate) throw DegenerateTriple("Cayley transform needs nondegeneracy");
    return rat_mat_vec(an.cayley, x_h0_coords);
}

// B^power on an algebra element.  Positive powers require support in
// n_- + h_1, negative powers in n_+ + h_2.
inline AlgebraElement b_apply(const TripleAnalysis& an, const AlgebraElement& x, int power) {
    const LieAlgebra& g = *an.alg;
    if (x.alg != &g) throw AlgebraMismatch("b_apply element over wrong algebra");
    AlgebraElement cur = x;
    int steps = std::abs(power);
    for (int s = 0; s < steps; ++s) {
        AlgebraElement next(g);
        for (auto& [idx, v] : cur.c) {
            if (std::abs(v) < kSparseEps) continue;
            if (power > 0) {
                if (g.is_e(idx)) throw OutsideDomain("B applied to an e-component");
                if (g.is_f(idx)) {
                    auto it = an.b_f_image.find(g.root_of_f(idx));
                    if (it != an.b_f_image.end())
                        next.add(g.f_index(it->second.first), v * to_double(it->second.second));
                } else {
                    // h-component: must be in h_1 = span{alpha^sharp, alpha in Gamma1};
                    // B(alpha^sharp) = (T alpha)^sharp.
                    int i = g.cartan_of_h(idx);
                    // decompose h_i over {alpha_j^sharp : j in Gamma1}: h_i = alpha_i^sharp/d_i
                    if (!an.gamma1.count(i)) throw OutsideDomain("h-component outside h_1");
                    int ti = an.spec.t_map.at(i);
                    // h_i = alpha_i^sharp / d_i -> (T alpha_i)^sharp / d_i = (d_ti/d_i) h_ti
                    next.add(g.h_index(ti), v * to_double(g.cartan.d[ti] / g.cartan.d[i]));
                }
            } else {
                if (g.is_f(idx)) throw OutsideDomain("B^{-1} applied to an f-component");
                if (g.is_e(idx)) {
                    auto it = an.binv_e_image.find(g.root_of_e(idx));
                    if (it != an.binv_e_image.end())
                        next.add(g.e_index(it->second.first), v * to_double(it->second.second));
                } else {
                    int i = g.cartan_of_h(idx);
                    if (!an.gamma2.count(i)) throw OutsideDomain("h-component outside h_2");
                    std::map<int, int> tinv;
                    for (auto& [a, b] : an.spec.t_map) tinv[b] = a;
                    int ti = tinv.at(i);
                    next.add(g.h_index(ti), v * to_double(g.cartan.d[ti] / g.cartan.d[i]));
                }
            }
        }
        cur = next;
    }
    return cur;
}

} // namespace drmat
