#pragma once

// The principal realization of an untwisted affine algebra and diagram
// automorphisms of its extended Dynkin diagram.
//
// Basis vectors are pairs (finite element, principal degree d): e_a t^{ht a + m h},
// f_a t^{-ht a + m h}, x_i t^{m h}, with h the Coxeter number.  All affine
// simple roots have principal degree 1 (node 0 carries f_theta t).  A diagram
// automorphism T of the extended diagram lifts to B with B(x t^d) = beta(x) t^d
// for a finite-order automorphism beta of g, pinned by
//
//   beta(f_{a_i}) = (finite part of the T(i)-th lowering generator),
//   beta(e_theta)  = (finite part of the T(0)-th lowering generator),
//
// and extended through the bracket expression trees of the basis.

#include <Eigen/Dense>

#include "drmat/tensor.hpp"
#include "drmat/theta.hpp"

namespace drmat {

struct AffineAutomorphism {
    const LieAlgebra* alg = nullptr;
    std::vector<int> perm; // permutation of {0..rank}, node 0 = affine node
    int order = 1;         // order of the permutation (= order of beta)
    int coxeter = 0;       // principal gradation period h
    int theta_root = -1;   // index of the highest root

    Eigen::MatrixXcd beta;     // automorphism of g over the canonical basis
    Eigen::MatrixXcd beta_inv; // beta^{-1}

    // fixed subalgebra l = h^beta and its complement h0 = (1-beta)h,
    // orthonormal under the h-form, in coroot coordinates
    std::vector<std::vector<double>> l_basis_num;
    std::vector<std::vector<double>> h0_basis_num;
    Eigen::MatrixXcd cayley_h0; // (beta+1)/(beta-1) on h0, in h0 ONB coordinates

    int dim_l() const { return static_cast<int>(l_basis_num.size()); }
};

namespace affine_detail {

// h-form Gram matrix as doubles
inline Eigen::MatrixXd h_gram(const LieAlgebra& g) {
    Eigen::MatrixXd G(g.rank, g.rank);
    for (int i = 0; i < g.rank; ++i)
        for (int j = 0; j < g.rank; ++j)
            G(i, j) = to_double(g.form[g.h_index(i)][g.h_index(j)]);
    return G;
}

// extended Cartan matrix over nodes {0..n}, node 0 = -theta
inline std::vector<std::vector<Rat>> extended_cartan(const LieAlgebra& g, int theta_idx) {
    int n = g.rank;
    std::vector<std::vector<Rat>> A(n + 1, std::vector<Rat>(n + 1, Rat(0)));
    auto root_of_node = [&](int node) {
        RootVec r(g.rank, 0);
        if (node == 0) {
            r = g.roots.positive[theta_idx];
            for (int& x : r) x = -x;
        } else {
            r[node - 1] = 1;
        }
        return r;
    };
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            RootVec ri = root_of_node(i), rj = root_of_node(j);
            A[i][j] = Rat(2) * g.roots.pairing(ri, rj) / g.roots.pairing(ri, ri);
        }
    return A;
}

} // namespace affine_detail

inline AffineAutomorphism analyze_affine_automorphism(const LieAlgebra& g,
                                                      const std::vector<int>& perm) {
    AffineAutomorphism aff;
    aff.alg = &g;
    aff.perm = perm;
    int n = g.rank;
    if (static_cast<int>(perm.size()) != n + 1)
        throw NotAutomorphism("permutation must cover all " + std::to_string(n + 1) +
                              " affine nodes");
    {
        std::vector<bool> seen(n + 1, false);
        for (int p : perm) {
            if (p < 0 || p > n || seen[p]) throw NotAutomorphism("not a permutation");
            seen[p] = true;
        }
    }
    // highest root = unique root of maximal height (last in sort order)
    aff.theta_root = g.num_pos - 1;
    aff.coxeter = g.roots.heights[aff.theta_root] + 1;
    // the permutation must preserve the extended Cartan matrix
    auto A = affine_detail::extended_cartan(g, aff.theta_root);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            if (A[perm[i]][perm[j]] != A[i][j])
                throw NotAutomorphism("permutation does not preserve the extended diagram");
    {
        aff.order = 1;
        std::vector<int> cur(n + 1);
        for (int i = 0; i <= n; ++i) cur[i] = perm[i];
        auto is_id = [&] {
            for (int i = 0; i <= n; ++i)
                if (cur[i] != i) return false;
            return true;
        };
        while (!is_id()) {
            for (int i = 0; i <= n; ++i) cur[i] = perm[cur[i]];
            ++aff.order;
            if (aff.order > 64) throw NotAutomorphism("permutation order overflow");
        }
    }

    // ---- build beta on the canonical basis -------------------------------
    // lowering generator of node k: f_{alpha_k} (k >= 1) or e_theta (k = 0)
    auto lowering_index = [&](int node) {
        if (node == 0) return g.e_index(aff.theta_root);
        RootVec a(g.rank, 0);
        a[node - 1] = 1;
        return g.f_index(g.roots.index_of_root.at(a));
    };
    std::vector<Eigen::VectorXcd> image(g.dim);
    std::vector<bool> known(g.dim, false);
    auto unit = [&](int idx) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(g.dim);
        v(idx) = 1.0;
        return v;
    };
    for (int node = 0; node <= n; ++node) {
        image[lowering_index(node)] = unit(lowering_index(perm[node]));
        known[lowering_index(node)] = true;
    }
    auto bracket_vec = [&](const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(g.dim);
        for (int i = 0; i < g.dim; ++i) {
            if (x(i) == cplx(0)) continue;
            for (int j = 0; j < g.dim; ++j) {
                if (y(j) == cplx(0)) continue;
                for (auto& [k, c] : g.bracket_basis(i, j)) out(k) += x(i) * y(j) * to_double(c);
            }
        }
        return out;
    };
    // e-side downward from theta: e_gamma = [f_{a_i}, e_{gamma + a_i}]/c
    {
        std::vector<int> roots_by_height(g.num_pos);
        for (int a = 0; a < g.num_pos; ++a) roots_by_height[a] = a;
        for (int a = g.num_pos - 1; a >= 0; --a) {
            int eidx = g.e_index(a);
            if (known[eidx]) continue;
            // find a simple i with gamma + alpha_i a positive root
            for (int i = 0; i < g.rank; ++i) {
                RootVec up = g.roots.positive[a];
                up[i] += 1;
                auto it = g.roots.index_of_root.find(up);
                if (it == g.roots.index_of_root.end()) continue;
                if (!known[g.e_index(it->second)]) continue;
                RootVec ai(g.rank, 0);
                ai[i] = 1;
                int fi = g.f_index(g.roots.index_of_root.at(ai));
                if (!known[fi]) continue;
                // [f_{a_i}, e_{up}] = c e_gamma
                Rat c(0);
                for (auto& [k, v] : g.bracket_basis(fi, g.e_index(it->second)))
                    if (k == eidx) c = v;
                if (c == Rat(0)) continue;
                image[eidx] =
                    bracket_vec(image[fi], image[g.e_index(it->second)]) / to_double(c);
                known[eidx] = true;
                break;
            }
            if (!known[eidx]) throw NotAutomorphism("could not extend beta to e-side");
        }
    }
    // f-side upward through the extraspecial trees
    for (int a = 0; a < g.num_pos; ++a) {
        int fidx = g.f_index(a);
        if (known[fidx]) continue;
        auto [ia, ib] = g.extraspecial[a];
        Rat c(0);
        for (auto& [k, v] : g.bracket_basis(g.f_index(ia), g.f_index(ib)))
            if (k == fidx) c = v;
        image[fidx] = bracket_vec(image[g.f_index(ia)], image[g.f_index(ib)]) / to_double(c);
        known[fidx] = true;
    }
    // h-side: beta(alpha_i^sharp) = [beta(e_i), beta(f_i)], h_i = alpha_i^sharp / d_i
    for (int i = 0; i < g.rank; ++i) {
        RootVec ai(g.rank, 0);
        ai[i] = 1;
        int ridx = g.roots.index_of_root.at(ai);
        Eigen::VectorXcd sharp = bracket_vec(image[g.e_index(ridx)], image[g.f_index(ridx)]);
        image[g.h_index(i)] = sharp / to_double(g.cartan.d[i]);
        known[g.h_index(i)] = true;
    }
    aff.beta = Eigen::MatrixXcd::Zero(g.dim, g.dim);
    for (int j = 0; j < g.dim; ++j) aff.beta.col(j) = image[j];
    aff.beta_inv = aff.beta.inverse();

    // sanity: beta^order = id, beta is an automorphism on generators, and
    // beta preserves h
    {
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(g.dim, g.dim);
        for (int k = 0; k < aff.order; ++k) p = aff.beta * p;
        if ((p - Eigen::MatrixXcd::Identity(g.dim, g.dim)).norm() > 1e-9)
            throw NotAutomorphism("lift of the diagram automorphism has wrong order");
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.dim; ++j)
                if (!g.is_h(j) && std::abs(aff.beta(j, g.h_index(i))) > 1e-10)
                    throw NotAutomorphism("beta does not preserve h");
    }

    // ---- l = h^beta, h0 = (1 - beta) h, Cayley on h0 ----------------------
    Eigen::MatrixXd G = affine_detail::h_gram(g);
    Eigen::MatrixXcd bh(g.rank, g.rank);
    for (int i = 0; i < g.rank; ++i)
        for (int j = 0; j < g.rank; ++j) bh(i, j) = aff.beta(g.h_index(i), g.h_index(j));
    auto form_h = [&](const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
        cplx s = 0;
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j) s += x(i) * G(i, j) * y(j);
        return s;
    };
    auto gram_schmidt = [&](std::vector<Eigen::VectorXcd> cand) {
        std::vector<Eigen::VectorXcd> out;
        for (auto& v : cand) {
            Eigen::VectorXcd w = v;
            for (int pass = 0; pass < 2; ++pass)
                for (auto& u : out) w -= form_h(u, w) * u;
            double nn = std::sqrt(std::abs(form_h(w, w)));
            if (nn < 1e-9) continue;
            out.push_back(w / nn);
        }
        return out;
    };
    // kernel of (beta - 1) on h via column reduction of candidates
    Eigen::MatrixXcd diff = bh - Eigen::MatrixXcd::Identity(g.rank, g.rank);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(diff);
    lu.setThreshold(1e-9);
    Eigen::MatrixXcd ker = lu.kernel();
    std::vector<Eigen::VectorXcd> lb;
    if (lu.dimensionOfKernel() > 0)
        for (int c = 0; c < ker.cols(); ++c) lb.push_back(ker.col(c));
    // discard spurious kernel column Eigen returns for full-rank matrices
    if (lu.rank() == g.rank) lb.clear();
    auto lonb = gram_schmidt(lb);
    std::vector<Eigen::VectorXcd> h0cand;
    for (int c = 0; c < g.rank; ++c) h0cand.push_back(diff.col(c));
    auto h0onb = gram_schmidt(h0cand);
    if (static_cast<int>(lonb.size() + h0onb.size()) != g.rank)
        throw NotAutomorphism("h does not split under beta");
    for (auto& v : lonb) {
        std::vector<double> row(g.rank);
        for (int i = 0; i < g.rank; ++i) row[i] = v(i).real();
        aff.l_basis_num.push_back(row);
    }
    for (auto& v : h0onb) {
        std::vector<double> row(g.rank);
        for (int i = 0; i < g.rank; ++i) row[i] = v(i).real();
        aff.h0_basis_num.push_back(row);
    }
    // Cayley (beta+1)/(beta-1) on h0 in the ONB coordinates
    int d0 = static_cast<int>(h0onb.size());
    if (d0 > 0) {
        Eigen::MatrixXcd bm(d0, d0), bp(d0, d0);
        for (int a = 0; a < d0; ++a)
            for (int b = 0; b < d0; ++b) {
                Eigen::VectorXcd img = bh * h0onb[b];
                bm(a, b) = form_h(h0onb[a], (img - h0onb[b]).eval());
                bp(a, b) = form_h(h0onb[a], (img + h0onb[b]).eval());
            }
        aff.cayley_h0 = bm.fullPivLu().solve(bp);
    } else {
        aff.cayley_h0 = Eigen::MatrixXcd::Zero(0, 0);
    }
    return aff;
}

// affine-node permutations used in the test bank
inline std::vector<int> affine_identity(const LieAlgebra& g) {
    std::vector<int> p(g.rank + 1);
    for (int i = 0; i <= g.rank; ++i) p[i] = i;
    return p;
}

// rotation of the A_n extended diagram (an (n+1)-gon) by k steps
inline std::vector<int> affine_rotation(const LieAlgebra& g, int k) {
    int m = g.rank + 1;
    std::vector<int> p(m);
    for (int i = 0; i < m; ++i) p[i] = (i + k) % m;
    return p;
}

} // namespace drmat
