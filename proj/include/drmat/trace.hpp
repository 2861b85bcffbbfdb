#pragma once

// Twisted traces of intertwiner compositions and the differential
// identities they satisfy.
//
//   F^{v_1..v_r}(lambda, mu) = Tr|_{M_mu'} ( Phi^{v_1} ... Phi^{v_r} B e^lambda ),
//   FF = delta_B . F,
//
// computed block by block: e^lambda is the scalar e^{(lambda, mu'-beta)} on
// the block, B re-roots monomials through the twist, and the Phi chain is
// applied with tensor payloads.  All series are truncated by root-lattice
// height; the working skeleton is taller than the reported series by the
// total height span of the modules so that truncation never loses terms
// that re-enter the diagonal.
//
// The KZB and second-order checks apply the operators exactly, order by
// order: the lambda-derivative of e^{(lambda, kappa - beta)} pairs the
// coefficient with P_l(kappa - beta), and r- or S-series multiplication is
// lattice convolution.  Residuals are reported per (height, l-class),
// since exponentials of lattice points agreeing on l are equal functions.

#include "drmat/intertwiner.hpp"
#include "drmat/rmatrix.hpp"

namespace drmat {

// scalar series with an exponential prefactor: e^{(lambda, prefactor)} x
// sum_beta coeff_beta e^{-(beta, lambda)}
struct ScalarSeries {
    Weight prefactor;
    LatticeSeries<cplx> series;
};

// V1 (x) ... (x) Vr valued series with prefactor
struct TraceSeries {
    Weight prefactor; // mu' for F, mu' + rho for FF
    std::vector<const FiniteModule*> modules;
    int height_cap = 0;
    std::map<Lattice, std::vector<cplx>> coeffs; // flat tensor coordinates
    int tensor_dim() const {
        int d = 1;
        for (auto* m : modules) d *= m->dim;
        return d;
    }
};

// ---- delta_B --------------------------------------------------------------

// product form: e^{(rho,lambda)} prod_{orbits in <Gamma3>/B} (1 - theta_a e^{-N_a(a,lambda)})
inline ScalarSeries delta_b_product(const TripleAnalysis& an, int cap) {
    const LieAlgebra& g = *an.alg;
    ScalarSeries out;
    out.prefactor = rho_weight(g);
    out.series = LatticeSeries<cplx>(g.rank, cap);
    out.series.add(Lattice(g.rank, 0), 1.0);
    // orbits of B on <Gamma3> roots
    std::set<int> seen;
    for (auto& [a, n] : an.n_table) {
        if (seen.count(a)) continue;
        // collect the orbit and its canonical lattice key: sum of the orbit
        Lattice key(g.rank, 0);
        int cur = a;
        for (int s = 0; s < n; ++s) {
            seen.insert(cur);
            for (int k = 0; k < g.rank; ++k) key[k] += g.roots.positive[cur][k];
            cur = an.t_root.at(cur);
        }
        cplx theta = to_double(an.theta_table.at(a));
        LatticeSeries<cplx> factor(g.rank, cap);
        factor.add(Lattice(g.rank, 0), 1.0);
        factor.add(key, -theta);
        // multiply into the running product
        LatticeSeries<cplx> next(g.rank, cap);
        for (auto& [k1, c1] : out.series.terms)
            for (auto& [k2, c2] : factor.terms) next.add(lattice_add(k1, k2), c1 * c2);
        out.series = std::move(next);
    }
    return out;
}

// trace form: Tr|_{M_{-rho}}(B e^lambda) as a series with prefactor -rho
inline ScalarSeries delta_b_trace(const TripleAnalysis& an, int cap) {
    const LieAlgebra& g = *an.alg;
    VermaSkeleton sk = build_verma_skeleton(g, cap, default_pbw(g));
    ScalarSeries out;
    out.prefactor = rho_weight(g);
    for (auto& x : out.prefactor) x = -x;
    out.series = LatticeSeries<cplx>(g.rank, cap);
    for (const Lattice& beta : sk.block_keys) {
        const auto& monos = sk.block(beta);
        cplx tr = 0;
        for (const Monomial& m : monos) {
            UElem img = twist_monomial(an, sk, m);
            auto it = img.find(m);
            if (it != img.end()) tr += it->second;
        }
        if (tr != cplx(0)) out.series.add(beta, tr);
    }
    return out;
}

// product x trace - 1, per-order residuals (reciprocity check)
inline std::map<int, double> delta_b_reciprocity(const TripleAnalysis& an, int cap) {
    const LieAlgebra& g = *an.alg;
    ScalarSeries p = delta_b_product(an, cap);
    ScalarSeries t = delta_b_trace(an, cap);
    LatticeSeries<cplx> conv(g.rank, cap);
    for (auto& [k1, c1] : p.series.terms)
        for (auto& [k2, c2] : t.series.terms) conv.add(lattice_add(k1, k2), c1 * c2);
    conv.add(Lattice(g.rank, 0), -1.0);
    std::map<int, double> per_order;
    for (int h = 0; h <= cap; ++h) per_order[h] = 0.0;
    for (auto& grp : collapse_classes(an, conv)) {
        cplx s = 0;
        for (const cplx* c : grp.second) s += *c;
        double& slot = per_order[grp.first.first];
        slot = std::max(slot, std::abs(s));
    }
    return per_order;
}

// evaluate a scalar series at a concrete lambda
inline cplx scalar_series_eval(const LieAlgebra& g, const ScalarSeries& s,
                               const LambdaPoint& lam) {
    cplx acc = 0;
    for (auto& [key, c] : s.series.terms) acc += c * std::exp(-lam.pair_lattice(key));
    Weight pre = s.prefactor;
    cplx e = 0;
    for (int i = 0; i < g.rank; ++i) e += pre[i] * lam.simple_pairings[i];
    return std::exp(e) * acc;
}

// ---- the twisted trace -----------------------------------------------------

struct TraceJob {
    const TripleAnalysis* an = nullptr;
    std::vector<const FiniteModule*> modules; // V_1 ... V_r
    std::vector<std::vector<cplx>> vectors;   // v_1 ... v_r
    Weight mu;                                // subscript of the innermost Phi
    int height = 3;
    PbwOrder order;                           // PBW order (oracle: vary it)
    RMatrixOptions r_options;                 // mutations for negative controls
};

namespace detail {

inline Weight vector_weight(const FiniteModule& V, const std::vector<cplx>& v) {
    const LieAlgebra& g = *V.alg;
    Weight w(g.rank, 0.0);
    bool found = false;
    for (int j = 0; j < V.dim; ++j)
        if (std::abs(v[j]) > 1e-14) {
            if (!found) {
                w = V.weights[j];
                found = true;
            }
        }
    return w;
}

} // namespace detail

// F^{v_1..v_r}(lambda, mu): prefactor mu' = mu - nu, coefficients in
// V_1 (x) .. (x) V_r.  Throws ShapovalovSingular on the Kac-Kazhdan locus.
inline TraceSeries trace_function(const TraceJob& job) {
    const TripleAnalysis& an = *job.an;
    const LieAlgebra& g = *an.alg;
    int r = static_cast<int>(job.modules.size());
    // working cap: reported height + total module span
    int span = 0;
    for (auto* m : job.modules) span += m->height_span();
    int work_cap = job.height + span;
    if (work_cap > 8)
        throw CapExceeded("working height " + std::to_string(work_cap) + " > 8");
    VermaSkeleton sk = build_verma_skeleton(g, work_cap, job.order);

    // weight chain: Phi_k has source mu - nu_{k+1} - ... - nu_r and target
    // source - nu_k (paper order: Phi^{v_1}_{mu-nu_2-..-nu_r} ... Phi^{v_r}_mu)
    std::vector<Weight> nu(r, Weight(g.rank, 0.0));
    for (int k = 0; k < r; ++k) nu[k] = detail::vector_weight(*job.modules[k], job.vectors[k]);
    Weight nu_total(g.rank, 0.0);
    for (int k = 0; k < r; ++k) nu_total = weight_add(nu_total, nu[k]);
    Weight mu_prime = weight_add(job.mu, nu_total, -1.0);

    // (mu', alpha) = (mu, T alpha) gate
    for (int i : an.gamma1) {
        int ti = an.spec.t_map.at(i);
        Weight ai(g.rank, 0.0), ati(g.rank, 0.0);
        ai[i] = 1.0;
        ati[ti] = 1.0;
        cplx lhs = weight_pairing(g, mu_prime, ai);
        cplx rhs = weight_pairing(g, job.mu, ati);
        if (std::abs(lhs - rhs) > 1e-10)
            throw WeightConstraintViolated("(mu',a)-(mu,Ta) = " +
                                           std::to_string(std::abs(lhs - rhs)));
    }

    // build the intertwiners innermost (k = r-1, source mu) outwards
    std::vector<Intertwiner> phis(r);
    {
        Weight src = job.mu;
        for (int k = r - 1; k >= 0; --k) {
            Weight tgt = weight_add(src, nu[k], -1.0);
            phis[k] = build_intertwiner(sk, *job.modules[k], job.vectors[k], tgt);
            src = tgt;
        }
    }

    TraceSeries out;
    out.prefactor = mu_prime;
    out.modules = job.modules;
    out.height_cap = job.height;
    int tdim = out.tensor_dim();
    for (const Lattice& beta : sk.block_keys) {
        if (lattice_height(beta) > job.height) continue;
        const auto& monos = sk.block(beta);
        if (monos.empty()) continue;
        std::vector<cplx> coeff(tdim, 0.0);
        bool nonzero = false;
        for (const Monomial& m : monos) {
            // B e^lambda: e^lambda contributes the prefactor bookkeeping only
            UElem bm = twist_monomial(an, sk, m);
            if (bm.empty()) continue;
            TensorPayloadVec state;
            state.payload_dim = 1;
            for (auto& [m2, c] : bm) state.terms[m2] = {c};
            for (int k = r - 1; k >= 0; --k) state = apply_intertwiner(phis[k], state);
            auto it = state.terms.find(m);
            if (it == state.terms.end()) continue;
            for (int t = 0; t < tdim; ++t) {
                coeff[t] += it->second[t];
                if (coeff[t] != cplx(0)) nonzero = true;
            }
        }
        if (nonzero) out.coeffs[beta] = std::move(coeff);
    }
    return out;
}

// FF = delta_B . F: convolve with the product polynomial; prefactor gains rho.
inline TraceSeries normalize_trace(const TripleAnalysis& an, const TraceSeries& f) {
    const LieAlgebra& g = *an.alg;
    ScalarSeries d = delta_b_product(an, f.height_cap);
    TraceSeries out;
    out.prefactor = weight_add(f.prefactor, rho_weight(g));
    out.modules = f.modules;
    out.height_cap = f.height_cap;
    for (auto& [k1, c1] : f.coeffs)
        for (auto& [k2, c2] : d.series.terms) {
            Lattice key = lattice_add(k1, k2);
            if (lattice_height(key) > f.height_cap) continue;
            auto [it, fresh] =
                out.coeffs.try_emplace(key, std::vector<cplx>(f.tensor_dim(), 0.0));
            (void)fresh;
            for (std::size_t t = 0; t < c1.size(); ++t) it->second[t] += c2 * c1[t];
        }
    return out;
}

// ---- operators on trace series ---------------------------------------------

namespace detail {

// act a g-basis element on one module slot of a flat tensor coordinate vector
inline void act_on_slot(const std::vector<const FiniteModule*>& mods, int slot,
                        const Eigen::MatrixXcd& mat, const std::vector<cplx>& in,
                        std::vector<cplx>& out) {
    // strides: row-major over (V_1, ..., V_r)
    int r = static_cast<int>(mods.size());
    std::vector<int> dims(r);
    for (int k = 0; k < r; ++k) dims[k] = mods[k]->dim;
    int stride = 1;
    for (int k = slot + 1; k < r; ++k) stride *= dims[k];
    int dim_s = dims[slot];
    int outer = 1;
    for (int k = 0; k < slot; ++k) outer *= dims[k];
    int block = dim_s * stride;
    for (int o = 0; o < outer; ++o)
        for (int a = 0; a < dim_s; ++a)
            for (int b = 0; b < dim_s; ++b) {
                cplx m = mat(a, b);
                if (m == cplx(0)) continue;
                for (int s = 0; s < stride; ++s)
                    out[o * block + a * stride + s] += m * in[o * block + b * stride + s];
            }
}

// apply a sparse g (x) g tensor to slots (i, j) of the flat coordinates
inline std::vector<cplx> act_tensor2(const std::vector<const FiniteModule*>& mods,
                                     const Tensor2& t, int slot_i, int slot_j,
                                     const std::vector<cplx>& in) {
    int tdim = 1;
    for (auto* m : mods) tdim *= m->dim;
    std::vector<cplx> out(tdim, 0.0);
    for (auto& [key, c] : t.c) {
        // first leg on slot_i, second on slot_j
        std::vector<cplx> tmp(tdim, 0.0);
        act_on_slot(mods, slot_j, mods[slot_j]->action[key[1]], in, tmp);
        for (auto& x : tmp) x *= c;
        act_on_slot(mods, slot_i, mods[slot_i]->action[key[0]], tmp, out);
    }
    return out;
}

// same-slot action of a (x) b: the symmetric combinations used by S_T make
// the composition order immaterial, but we keep a . b as written: first b,
// then a.
inline std::vector<cplx> act_tensor2_same(const std::vector<const FiniteModule*>& mods,
                                          const Tensor2& t, int slot,
                                          const std::vector<cplx>& in) {
    int tdim = 1;
    for (auto* m : mods) tdim *= m->dim;
    std::vector<cplx> out(tdim, 0.0);
    for (auto& [key, c] : t.c) {
        std::vector<cplx> tmp(tdim, 0.0);
        act_on_slot(mods, slot, mods[slot]->action[key[1]], in, tmp);
        for (auto& x : tmp) x *= c;
        act_on_slot(mods, slot, mods[slot]->action[key[0]], tmp, out);
    }
    return out;
}

// P_l((kappa - beta)^sharp) as complex coroot coordinates
inline std::vector<cplx> l_part_sharp(const TripleAnalysis& an, const Weight& kappa,
                                      const Lattice& beta) {
    const LieAlgebra& g = *an.alg;
    std::vector<cplx> sh(g.rank);
    for (int j = 0; j < g.rank; ++j)
        sh[j] = (kappa[j] - static_cast<double>(beta[j])) * to_double(g.cartan.d[j]);
    std::vector<cplx> out(g.rank, 0.0);
    for (int i = 0; i < g.rank; ++i)
        for (int j = 0; j < g.rank; ++j) out[i] += to_double(an.proj_l[i][j]) * sh[j];
    return out;
}

} // namespace detail

// KZB operator K_i applied to a trace-like series:
//   K_i = sum_{j in I1} x_{j|V_i} d/dx_j + sum_{j>i} r|V_iV_j - sum_{j<i} r|V_jV_i.
// r_series must be expanded at least to the series' height cap.
inline TraceSeries apply_kzb_operator(const TripleAnalysis& an, const TraceSeries& s,
                                      int slot_i, const LatticeSeries<Tensor2>& r_series) {
    int r = static_cast<int>(s.modules.size());
    TraceSeries out;
    out.prefactor = s.prefactor;
    out.modules = s.modules;
    out.height_cap = s.height_cap;
    int tdim = s.tensor_dim();
    for (auto& [beta, c] : s.coeffs) {
        // derivative term
        std::vector<cplx> acc(tdim, 0.0);
        std::vector<cplx> xl = detail::l_part_sharp(an, s.prefactor, beta);
        Eigen::MatrixXcd hmat = module_h_action(*s.modules[slot_i], xl);
        detail::act_on_slot(s.modules, slot_i, hmat, c, acc);
        auto [it0, fresh0] = out.coeffs.try_emplace(beta, std::vector<cplx>(tdim, 0.0));
        (void)fresh0;
        for (int t = 0; t < tdim; ++t) it0->second[t] += acc[t];
        // r-matrix terms
        for (auto& [gamma, rt] : r_series.terms) {
            Lattice key = lattice_add(beta, gamma);
            if (lattice_height(key) > s.height_cap) continue;
            std::vector<cplx> add(tdim, 0.0);
            for (int j = slot_i + 1; j < r; ++j) {
                auto v = detail::act_tensor2(s.modules, rt, slot_i, j, c);
                for (int t = 0; t < tdim; ++t) add[t] += v[t];
            }
            for (int j = 0; j < slot_i; ++j) {
                auto v = detail::act_tensor2(s.modules, rt, j, slot_i, c);
                for (int t = 0; t < tdim; ++t) add[t] -= v[t];
            }
            bool nz = false;
            for (auto& x : add)
                if (x != cplx(0)) nz = true;
            if (!nz) continue;
            auto [it, fresh] = out.coeffs.try_emplace(key, std::vector<cplx>(tdim, 0.0));
            (void)fresh;
            for (int t = 0; t < tdim; ++t) it->second[t] += add[t];
        }
    }
    return out;
}

// per-order residual of a V-valued series (collapsed over l-classes)
inline std::map<int, double> series_residual_norms(const TripleAnalysis& an,
                                                   const TraceSeries& s) {
    std::map<std::pair<int, std::vector<Rat>>, std::vector<cplx>> grouped;
    for (auto& [beta, c] : s.coeffs) {
        auto key = std::make_pair(lattice_height(beta), l_class_key(an, beta));
        auto [it, fresh] = grouped.try_emplace(key, std::vector<cplx>(c.size(), 0.0));
        (void)fresh;
        for (std::size_t t = 0; t < c.size(); ++t) it->second[t] += c[t];
    }
    std::map<int, double> out;
    for (int h = 0; h <= s.height_cap; ++h) out[h] = 0.0;
    for (auto& [key, c] : grouped) {
        double n = 0;
        for (auto& x : c) n += std::norm(x);
        out[key.first] = std::max(out[key.first], std::sqrt(n));
    }
    return out;
}

struct KzbReport {
    std::map<int, double> per_order; // height -> residual
    double max_residual = 0;
};

// Full KZB check for a trace job: builds F, FF and tests every equation i.
inline KzbReport kzb_check(const TraceJob& job) {
    const TripleAnalysis& an = *job.an;
    const LieAlgebra& g = *an.alg;
    int r = static_cast<int>(job.modules.size());
    TraceSeries f = trace_function(job);
    TraceSeries ff = normalize_trace(an, f);
    LatticeSeries<Tensor2> r_series =
        expand_r_series(an, std::max(1, job.height), job.r_options);
    std::vector<Weight> nu(r, Weight(g.rank, 0.0));
    for (int k = 0; k < r; ++k)
        nu[k] = detail::vector_weight(*job.modules[k], job.vectors[k]);
    KzbReport rep;
    for (int h = 0; h <= job.height; ++h) rep.per_order[h] = 0.0;
    for (int i = 0; i < r; ++i) {
        TraceSeries lhs = apply_kzb_operator(an, ff, i, r_series);
        // Delta arguments: mu - nu_{i+1} - ... - nu_r and mu - nu_i - ... - nu_r
        Weight m1 = job.mu, m2 = job.mu;
        for (int k = i + 1; k < r; ++k) m1 = weight_add(m1, nu[k], -1.0);
        for (int k = i; k < r; ++k) m2 = weight_add(m2, nu[k], -1.0);
        cplx rhs = 0.5 * (casimir_scalar(g, m1) - casimir_scalar(g, m2));
        for (auto& [beta, c] : ff.coeffs) {
            auto [it, fresh] =
                lhs.coeffs.try_emplace(beta, std::vector<cplx>(ff.tensor_dim(), 0.0));
            (void)fresh;
            for (std::size_t t = 0; t < c.size(); ++t) it->second[t] -= rhs * c[t];
        }
        for (auto& [h, v] : series_residual_norms(an, lhs))
            rep.per_order[h] = std::max(rep.per_order[h], v);
    }
    for (auto& [h, v] : rep.per_order) rep.max_residual = std::max(rep.max_residual, v);
    return rep;
}

// ---- S_T and the second-order equation --------------------------------------

// S_T(lambda) as a lattice series:
//   sum_a sum_{s>=0} sum_{v>=1} e^{-(s+v)(a,lambda)} (B^s f_a (x) B^{-v} e_a + swap)
//   - sum_{j in I2} (1-C_T)/2 x_j (x) (1-C_T)/2 x_j   (constant term)
inline LatticeSeries<Tensor2> expand_s_series(const TripleAnalysis& an, int cap) {
    const LieAlgebra& g = *an.alg;
    LatticeSeries<Tensor2> out(g.rank, cap);
    // constant term
    {
        Tensor2 c0(g);
        auto [basis, dual] = detail::h_dual_pairs(g);
        (void)basis;
        // M = (P0 - C_T P0)/2 acting on both legs of Omega_h
        RatMat P0 = rat_identity(g.rank);
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j) P0[i][j] -= an.proj_l[i][j];
        RatMat M = rat_zeros(g.rank, g.rank);
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j)
                M[i][j] = (P0[i][j] - an.cayley_h[i][j]) / Rat(2);
        for (int j = 0; j < g.rank; ++j)
            for (int a = 0; a < g.rank; ++a)
                for (int b = 0; b < g.rank; ++b) {
                    Rat coef = -M[a][j] * [&] {
                        Rat s(0);
                        for (int k = 0; k < g.rank; ++k) s += M[b][k] * dual[j][k];
                        return s;
                    }();
                    if (coef != Rat(0))
                        c0.add({g.h_index(a), g.h_index(b)}, to_double(coef));
                }
        out.add(Lattice(g.rank, 0), c0);
    }
    // double series
    for (int a = 0; a < g.num_pos; ++a) {
        int ht = g.roots.heights[a];
        // B^s f_a chain (s = 0 allowed), B^{-v} e_a chain (v >= 1)
        std::vector<std::pair<int, Rat>> fchain{{a, Rat(1)}}; // s = 0
        {
            int cur = a;
            Rat coef(1);
            for (int s = 1; s * ht <= cap; ++s) {
                auto it = an.b_f_image.find(cur);
                if (it == an.b_f_image.end()) break;
                coef *= it->second.second;
                cur = it->second.first;
                fchain.emplace_back(cur, coef);
            }
        }
        std::vector<std::pair<int, Rat>> echain; // v >= 1
        {
            int cur = a;
            Rat coef(1);
            for (int v = 1; v * ht <= cap; ++v) {
                auto it = an.binv_e_image.find(cur);
                if (it == an.binv_e_image.end()) break;
                coef *= it->second.second;
                cur = it->second.first;
                echain.emplace_back(cur, coef);
            }
        }
        for (std::size_t s = 0; s < fchain.size(); ++s)
            for (std::size_t v = 1; v <= echain.size(); ++v) {
                int total = static_cast<int>(s + v);
                if (total * ht > cap) continue;
                Lattice key(g.rank, 0);
                for (int k = 0; k < g.rank; ++k)
                    key[k] = total * g.roots.positive[a][k];
                auto [fb, fc] = fchain[s];
                auto [eb, ec] = echain[v - 1];
                Tensor2 t(g);
                cplx c = to_double(fc * ec);
                t.add({g.f_index(fb), g.e_index(eb)}, c);
                t.add({g.e_index(eb), g.f_index(fb)}, c);
                out.add(key, t);
            }
    }
    return out;
}

// second-order residual: sum_j d^2/dx_j^2 FF - sum_{l,n} S|V_lV_n FF
//                        - (mu + rho, mu + rho) FF, per order
inline KzbReport second_order_check(const TraceJob& job) {
    const TripleAnalysis& an = *job.an;
    const LieAlgebra& g = *an.alg;
    int r = static_cast<int>(job.modules.size());
    TraceSeries f = trace_function(job);
    TraceSeries ff = normalize_trace(an, f);
    LatticeSeries<Tensor2> s_series = expand_s_series(an, std::max(1, job.height));
    int tdim = ff.tensor_dim();
    TraceSeries lhs;
    lhs.prefactor = ff.prefactor;
    lhs.modules = ff.modules;
    lhs.height_cap = ff.height_cap;
    // Laplacian term: sum_{j in I1} (kappa - beta, x_j)^2 = (v, P_l v) with
    // v = (kappa - beta)^sharp, complex bilinear
    for (auto& [beta, c] : ff.coeffs) {
        std::vector<cplx> sh(g.rank);
        for (int j = 0; j < g.rank; ++j)
            sh[j] = (ff.prefactor[j] - static_cast<double>(beta[j])) *
                    to_double(g.cartan.d[j]);
        std::vector<cplx> p(g.rank, 0.0);
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j) p[i] += to_double(an.proj_l[i][j]) * sh[j];
        // (v, P v) under the h-form
        cplx lap = 0;
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j)
                lap += sh[i] * p[j] * to_double(g.cartan.a[i][j] / g.cartan.d[j]);
        auto [it, fresh] = lhs.coeffs.try_emplace(beta, std::vector<cplx>(tdim, 0.0));
        (void)fresh;
        for (int t = 0; t < tdim; ++t) it->second[t] += lap * c[t];
    }
    // - sum_{l,n} S|V_l V_n
    for (auto& [beta, c] : ff.coeffs)
        for (auto& [gamma, st] : s_series.terms) {
            Lattice key = lattice_add(beta, gamma);
            if (lattice_height(key) > ff.height_cap) continue;
            std::vector<cplx> add(tdim, 0.0);
            for (int l = 0; l < r; ++l)
                for (int n = 0; n < r; ++n) {
                    std::vector<cplx> v = (l == n)
                        ? detail::act_tensor2_same(ff.modules, st, l, c)
                        : detail::act_tensor2(ff.modules, st, l, n, c);
                    for (int t = 0; t < tdim; ++t) add[t] += v[t];
                }
            bool nz = false;
            for (auto& x : add)
                if (x != cplx(0)) nz = true;
            if (!nz) continue;
            auto [it, fresh] = lhs.coeffs.try_emplace(key, std::vector<cplx>(tdim, 0.0));
            (void)fresh;
            for (int t = 0; t < tdim; ++t) it->second[t] -= add[t];
        }
    // - (mu + rho, mu + rho)
    Weight mr = weight_add(job.mu, rho_weight(g));
    cplx eig = weight_pairing(g, mr, mr);
    for (auto& [beta, c] : ff.coeffs) {
        auto [it, fresh] = lhs.coeffs.try_emplace(beta, std::vector<cplx>(tdim, 0.0));
        (void)fresh;
        for (int t = 0; t < tdim; ++t) it->second[t] -= eig * c[t];
    }
    KzbReport rep;
    for (int h = 0; h <= job.height; ++h) rep.per_order[h] = 0.0;
    for (auto& [h, v] : series_residual_norms(an, lhs))
        rep.per_order[h] = std::max(rep.per_order[h], v);
    for (auto& [h, v] : rep.per_order) rep.max_residual = std::max(rep.max_residual, v);
    return rep;
}

// ---- Weyl denominator identity ----------------------------------------------
//
// The h-valued identity satisfied by Tr|_{M_{-rho}}(B e^lambda):
//
//   sum_{j in I1} x_j d_j Tr + (rho + K(lambda)) Tr = 0,
//
// where the scalar interpretation of the twisted-denominator term is fixed
// by the log-derivative of delta_B (equivalently by the T = id reduction to
// the classical identity):
//
//   K(lambda) = sum_{alpha in <Gamma3>, t} alpha^sharp
//               theta_a e^{-N_a (a,lambda)} / (1 - theta_a e^{-N_a (a,lambda)}).
inline std::map<int, double> weyl_denominator_identity(const TripleAnalysis& an, int cap) {
    const LieAlgebra& g = *an.alg;
    ScalarSeries tr = delta_b_trace(an, cap);
    // K as an h-valued lattice series
    LatticeSeries<std::vector<cplx>> kser(g.rank, cap);
    for (auto& [a, n] : an.n_table) {
        Rat theta = an.theta_table.at(a);
        int step_h = n * g.roots.heights[a];
        RatVec sharp = g.sharp(g.roots.positive[a]);
        Rat th(1);
        for (int m = 1; m * step_h <= cap; ++m) {
            th *= theta;
            Lattice key(g.rank, 0);
            for (int k = 0; k < g.rank; ++k) key[k] = m * n * g.roots.positive[a][k];
            std::vector<cplx> vec(g.rank, 0.0);
            for (int k = 0; k < g.rank; ++k) vec[k] = to_double(th * sharp[k]);
            kser.add(key, vec);
        }
    }
    // residual series, h-valued
    LatticeSeries<std::vector<cplx>> res(g.rank, cap);
    Weight rho = rho_weight(g);
    for (auto& [beta, t] : tr.series.terms) {
        // sum_j x_j d_j: P_l((-rho - beta)^sharp)
        std::vector<cplx> v(g.rank, 0.0);
        std::vector<cplx> sh(g.rank);
        for (int j = 0; j < g.rank; ++j)
            sh[j] = (-rho[j] - static_cast<double>(beta[j])) * to_double(g.cartan.d[j]);
        for (int i = 0; i < g.rank; ++i)
            for (int j = 0; j < g.rank; ++j) v[i] += to_double(an.proj_l[i][j]) * sh[j];
        // + rho^sharp
        std::vector<cplx> rho_sh(g.rank);
        for (int j = 0; j < g.rank; ++j) rho_sh[j] = rho[j] * to_double(g.cartan.d[j]);
        for (int i = 0; i < g.rank; ++i) v[i] += rho_sh[i];
        for (auto& x : v) x *= t;
        res.add(beta, v);
    }
    for (auto& [kk, kv] : kser.terms)
        for (auto& [bb, t] : tr.series.terms) {
            Lattice key = lattice_add(kk, bb);
            if (lattice_height(key) > cap) continue;
            std::vector<cplx> v = kv;
            for (auto& x : v) x *= t;
            res.add(key, v);
        }
    std::map<int, double> per_order;
    for (int h = 0; h <= cap; ++h) per_order[h] = 0.0;
    std::map<std::pair<int, std::vector<Rat>>, std::vector<cplx>> grouped;
    for (auto& [beta, v] : res.terms) {
        auto key = std::make_pair(lattice_height(beta), l_class_key(an, beta));
        auto [it, fresh] = grouped.try_emplace(key, std::vector<cplx>(g.rank, 0.0));
        (void)fresh;
        for (int k = 0; k < g.rank; ++k) it->second[k] += v[k];
    }
    for (auto& [key, v] : grouped) {
        double nrm = 0;
        for (auto& x : v) nrm += std::norm(x);
        per_order[key.first] = std::max(per_order[key.first], std::sqrt(nrm));
    }
    return per_order;
}

} // namespace drmat
