#pragma once

// Finite-dimensional modules (weight basis plus action matrices) and the
// intertwining operators Phi^v : M_src -> M_tgt (x) V, determined by their
// singular vector
//
//   S = sum_beta u_beta,   u_beta in M_tgt[mu - beta] (x) V[wt(v) + beta],
//
// solved degree by degree from (e_i (x) 1) u_beta = -(1 (x) e_i) u_{beta-a_i}.
// Rank deficiency of the stacked system is the Kac-Kazhdan locus and
// surfaces as ShapovalovSingular; callers resample mu.

#include <Eigen/Dense>

#include "drmat/verma.hpp"

namespace drmat {

struct FiniteModule {
    const LieAlgebra* alg = nullptr;
    std::string name;
    int dim = 0;
    std::vector<Weight> weights; // weight of each basis vector
    // action[g-basis index]: dense dim x dim matrix, column = image of basis j
    std::vector<Eigen::MatrixXcd> action;

    // height span: max ht(w) - min ht(w) over weights; bounds how far a
    // module leg can absorb Verma degree in a composite trace
    int height_span() const {
        double lo = 1e300, hi = -1e300;
        for (const Weight& w : weights) {
            double h = 0;
            for (const cplx& x : w) h += x.real();
            lo = std::min(lo, h);
            hi = std::max(hi, h);
        }
        return static_cast<int>(std::lround(hi - lo));
    }
};

inline FiniteModule trivial_module(const LieAlgebra& g) {
    FiniteModule m;
    m.alg = &g;
    m.name = "trivial";
    m.dim = 1;
    m.weights = {Weight(g.rank, 0.0)};
    m.action.assign(g.dim, Eigen::MatrixXcd::Zero(1, 1));
    return m;
}

inline FiniteModule adjoint_module(const LieAlgebra& g) {
    FiniteModule m;
    m.alg = &g;
    m.name = "adjoint";
    m.dim = g.dim;
    m.weights.resize(g.dim);
    for (int j = 0; j < g.dim; ++j) {
        RootVec w = g.weight_of_basis(j);
        m.weights[j].assign(g.rank, 0.0);
        for (int k = 0; k < g.rank; ++k) m.weights[j][k] = static_cast<double>(w[k]);
    }
    m.action.assign(g.dim, Eigen::MatrixXcd::Zero(g.dim, g.dim));
    for (int x = 0; x < g.dim; ++x)
        for (int j = 0; j < g.dim; ++j)
            for (auto& [k, n] : g.bracket_basis(x, j)) m.action[x](k, j) += to_double(n);
    return m;
}

inline FiniteModule module_by_name(const LieAlgebra& g, const std::string& name) {
    if (name == "adjoint") return adjoint_module(g);
    if (name == "trivial") return trivial_module(g);
    throw UsageError("unknown module '" + name + "' (adjoint|trivial)");
}

// action of an h-space element (complex coroot coordinates) on V
inline Eigen::MatrixXcd module_h_action(const FiniteModule& V, const std::vector<cplx>& y) {
    const LieAlgebra& g = *V.alg;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(V.dim, V.dim);
    for (int j = 0; j < V.dim; ++j) out(j, j) = weight_on_h(g, V.weights[j], y);
    return out;
}

struct Intertwiner {
    const VermaSkeleton* skel = nullptr; // shared monomial skeleton
    const FiniteModule* module = nullptr;
    Weight mu_target;
    Weight lambda_source; // mu_target + wt(v)
    std::vector<cplx> v;  // highest matrix element in V coordinates
    // singular vector: block beta -> (monomials of beta) x (V basis) matrix
    std::map<Lattice, Eigen::MatrixXcd> singular;
};

namespace detail {

// matrix of e_i : M[mu - beta] -> M[mu - beta + alpha_i] in monomial bases
inline Eigen::MatrixXcd e_block_matrix(const VermaSkeleton& sk, const Weight& mu, int i,
                                       const Lattice& beta) {
    const LieAlgebra& g = *sk.alg;
    Lattice up = beta;
    up[i] -= 1;
    const auto& src = sk.block(beta);
    const auto& tgt = sk.block(up);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(tgt.size(), src.size());
    if (tgt.empty() || src.empty()) return out;
    for (std::size_t c = 0; c < src.size(); ++c) {
        UElem img = act_e_simple(g, sk.order, i, mu, UElem{{src[c], 1.0}}, sk.cap);
        for (auto& [m, v] : img) out(sk.pos_in_block.at(m), c) = v;
    }
    return out;
}

} // namespace detail

// Build Phi^v degree by degree up to the skeleton cap.
inline Intertwiner build_intertwiner(const VermaSkeleton& sk, const FiniteModule& V,
                                     const std::vector<cplx>& v, const Weight& mu) {
    const LieAlgebra& g = *sk.alg;
    Intertwiner phi;
    phi.skel = &sk;
    phi.module = &V;
    phi.mu_target = mu;
    phi.v = v;
    // weight of v (all components must agree)
    Weight wt_v(g.rank, 0.0);
    {
        bool found = false;
        for (int j = 0; j < V.dim; ++j)
            if (std::abs(v[j]) > 1e-14) {
                if (!found) {
                    wt_v = V.weights[j];
                    found = true;
                } else {
                    for (int k = 0; k < g.rank; ++k)
                        if (std::abs(wt_v[k] - V.weights[j][k]) > 1e-12)
                            throw Error("intertwiner datum v is not weight-homogeneous");
                }
            }
        if (!found) throw Error("intertwiner datum v = 0");
    }
    phi.lambda_source = weight_add(mu, wt_v);

    // V-weight slice indices per lattice point: weight wt_v + beta
    auto slice = [&](const Lattice& beta) {
        std::vector<int> idx;
        for (int j = 0; j < V.dim; ++j) {
            bool match = true;
            for (int k = 0; k < g.rank; ++k)
                if (std::abs(V.weights[j][k] - (wt_v[k] + static_cast<double>(beta[k]))) >
                    1e-9)
                    match = false;
            if (match) idx.push_back(j);
        }
        return idx;
    };

    // degree 0
    {
        Lattice zero(g.rank, 0);
        Eigen::MatrixXcd u0(1, V.dim);
        for (int j = 0; j < V.dim; ++j) u0(0, j) = v[j];
        phi.singular[zero] = u0;
    }
    // blocks sorted by height in sk.block_keys? ensure order by height
    std::vector<Lattice> keys = sk.block_keys;
    std::sort(keys.begin(), keys.end(), [](const Lattice& a, const Lattice& b) {
        int ha = lattice_height(a), hb = lattice_height(b);
        if (ha != hb) return ha < hb;
        return a < b;
    });
    for (const Lattice& beta : keys) {
        if (lattice_height(beta) == 0) continue;
        const auto& monos = sk.block(beta);
        if (monos.empty()) continue;
        std::vector<int> vcols = slice(beta);
        int dM = static_cast<int>(monos.size());
        int dV = static_cast<int>(vcols.size());
        if (dV == 0) {
            phi.singular[beta] = Eigen::MatrixXcd::Zero(dM, V.dim);
            continue;
        }
        // stack equations over i
        std::vector<Eigen::MatrixXcd> lhs_blocks, rhs_blocks;
        int total_rows = 0;
        for (int i = 0; i < g.rank; ++i) {
            Lattice down = beta;
            down[i] -= 1;
            bool has_lower = down[i] >= 0 && sk.blocks.count(down);
            Eigen::MatrixXcd Ei = detail::e_block_matrix(sk, mu, i, beta); // tgt x dM
            int rows = static_cast<int>(Ei.rows());
            if (rows == 0) continue;
            Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(rows, dV);
            if (has_lower) {
                auto itl = phi.singular.find(down);
                if (itl != phi.singular.end() && itl->second.size() != 0) {
                    // -(1 (x) e_i) u_down restricted to the slice columns
                    const Eigen::MatrixXcd& Ul = itl->second; // dM(down) x V.dim
                    Eigen::MatrixXcd prod = Ul * V.action[g.e_index(
                        g.roots.index_of_root.at([&] {
                            RootVec a(g.rank, 0);
                            a[i] = 1;
                            return a;
                        }()))].transpose();
                    for (int c = 0; c < dV; ++c) rhs.col(c) = -prod.col(vcols[c]);
                }
            }
            lhs_blocks.push_back(Ei);
            rhs_blocks.push_back(rhs);
            total_rows += rows;
        }
        // assemble (sum_i rows*dV) x (dM*dV) system for vec(U) with U: dM x dV
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(total_rows * dV, dM * dV);
        Eigen::VectorXcd b = Eigen::VectorXcd::Zero(total_rows * dV);
        int row0 = 0;
        for (std::size_t bi = 0; bi < lhs_blocks.size(); ++bi) {
            const Eigen::MatrixXcd& Ei = lhs_blocks[bi];
            const Eigen::MatrixXcd& rhs = rhs_blocks[bi];
            for (int r = 0; r < Ei.rows(); ++r)
                for (int c = 0; c < dV; ++c) {
                    int row = row0 + r * dV + c;
                    for (int m = 0; m < dM; ++m) A(row, m * dV + c) = Ei(r, m);
                    b(row) = rhs(r, c);
                }
            row0 += static_cast<int>(Ei.rows()) * dV;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
        qr.setThreshold(1e-9);
        if (qr.rank() < dM * dV)
            throw ShapovalovSingular(lattice_height(beta),
                                     "rank " + std::to_string(qr.rank()) + " < " +
                                         std::to_string(dM * dV));
        Eigen::VectorXcd x = qr.solve(b);
        double resid = (A * x - b).norm();
        double scale = std::max(1.0, b.norm());
        if (resid > 1e-8 * scale)
            throw ShapovalovSingular(lattice_height(beta),
                                     "inconsistent system, residual " + std::to_string(resid));
        Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(dM, V.dim);
        for (int m = 0; m < dM; ++m)
            for (int c = 0; c < dV; ++c) U(m, vcols[c]) = x(m * dV + c);
        phi.singular[beta] = U;
    }
    return phi;
}

// Verify e_i . S = 0 at every computed degree (diagnostic; returns max norm).
inline double intertwiner_defect(const Intertwiner& phi) {
    const VermaSkeleton& sk = *phi.skel;
    const LieAlgebra& g = *sk.alg;
    const FiniteModule& V = *phi.module;
    double worst = 0;
    for (int i = 0; i < g.rank; ++i) {
        // components of e_i S at M-block gamma: (e_i (x) 1) u_{gamma+a_i} + (1 (x) e_i) u_gamma
        for (auto& [beta, U] : phi.singular) {
            if (lattice_height(beta) >= sk.cap) continue; // truncated above
            Lattice up = beta;
            up[i] += 1;
            Eigen::MatrixXcd term = Eigen::MatrixXcd::Zero(
                std::max<std::size_t>(sk.block(beta).size(), 1), V.dim);
            bool any = false;
            auto itu = phi.singular.find(up);
            if (itu != phi.singular.end() && sk.block(up).size() > 0) {
                Eigen::MatrixXcd Ei = detail::e_block_matrix(sk, phi.mu_target, i, up);
                term += Ei * itu->second;
                any = true;
            }
            {
                RootVec a(g.rank, 0);
                a[i] = 1;
                int e_idx = g.e_index(g.roots.index_of_root.at(a));
                term += U * V.action[e_idx].transpose();
                any = true;
            }
            if (any) worst = std::max(worst, term.norm());
        }
    }
    return worst;
}

// Apply Phi to a module vector carrying tensor payloads.
//
// The payload of each monomial is a flat vector over an accumulated tensor
// space; Phi adds its module as a new leftmost leg: payload' = e_w (x) payload.
struct TensorPayloadVec {
    std::map<Monomial, std::vector<cplx>> terms;
    int payload_dim = 1;
};

inline TensorPayloadVec apply_intertwiner(const Intertwiner& phi,
                                          const TensorPayloadVec& in) {
    const VermaSkeleton& sk = *phi.skel;
    const LieAlgebra& g = *sk.alg;
    const FiniteModule& V = *phi.module;
    int pd = in.payload_dim;
    TensorPayloadVec out;
    out.payload_dim = V.dim * pd;
    auto add_term = [&](const Monomial& m, int w, cplx coef,
                        const std::vector<cplx>& payload) {
        if (std::abs(coef) < 1e-300) return;
        auto [it, fresh] = out.terms.try_emplace(m, std::vector<cplx>(V.dim * pd, 0.0));
        (void)fresh;
        for (int p = 0; p < pd; ++p)
            if (payload[p] != cplx(0)) it->second[w * pd + p] += coef * payload[p];
    };
    for (auto& [mono, payload] : in.terms) {
        // Phi(mono v_src) = Delta(f_word) S; letters applied right to left
        // state: map monomial -> vector over V
        std::map<Monomial, Eigen::VectorXcd> state;
        for (auto& [beta, U] : phi.singular) {
            const auto& monos = sk.block(beta);
            for (std::size_t r = 0; r < monos.size(); ++r) {
                Eigen::VectorXcd row = U.row(r).transpose();
                if (row.norm() > 0) state[monos[r]] = row;
            }
        }
        for (auto letter_it = mono.rbegin(); letter_it != mono.rend(); ++letter_it) {
            int root = *letter_it;
            std::map<Monomial, Eigen::VectorXcd> next;
            auto accum = [&](const Monomial& m, const Eigen::VectorXcd& vec) {
                auto [it, fresh] = next.try_emplace(m, vec);
                if (!fresh) it->second += vec;
            };
            for (auto& [m, vec] : state) {
                // f (x) 1
                for (auto& [m2, c2] :
                     act_f(g, sk.order, root, UElem{{m, cplx(1.0)}}, sk.cap))
                    accum(m2, (c2 * vec).eval());
                // 1 (x) f
                Eigen::VectorXcd fv = V.action[g.f_index(root)] * vec;
                if (fv.norm() > 0) accum(m, fv);
            }
            state = std::move(next);
        }
        for (auto& [m, vec] : state)
            for (int w = 0; w < V.dim; ++w)
                if (vec(w) != cplx(0)) add_term(m, w, vec(w), payload);
    }
    return out;
}

} // namespace drmat
