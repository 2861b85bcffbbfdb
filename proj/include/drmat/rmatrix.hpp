#pragma once

// The trigonometric dynamical r-matrix attached to a nondegenerate triple:
//
//   r_T(lambda) = -1/2 sum_j x_j (x) x_j  +  1/2 sum_{i in I2} C_T x_i (x) x_i
//                 - sum_a f_a (x) e_a
//                 + sum_a sum_{l>=1} e^{-l(a,lambda)} e_a ^ B^l f_a
//
// with a ^ b = a (x) b - b (x) a.  For roots whose B-orbit is periodic the
// l-sum is resummed per orbit:
//
//   sum_{l=1}^{N_a} e^{-l(a,lambda)} / (1 - theta_a e^{-N_a (a,lambda)}) e_a ^ B^l f_a,
//
// which keeps the pole structure of each orbit explicit; for the others the
// sum terminates because B eventually kills f_a.  Cartan sums are assembled
// basis-free from exact dual bases, so only lambda enters in floating point.
//
// The CDYBE residual evaluates
//
//   sum_{j in I1} ( x_j^{(1)} d_j r^{23} - x_j^{(2)} d_j r^{13} + x_j^{(3)} d_j r^{12} )
//     + [r12, r13] + [r13, r23] + [r12, r23]
//
// with d_j along l only (r has no h0-dependence).  Derivatives are analytic;
// an optional central-difference pass cross-checks them.

#include "drmat/sampling.hpp"
#include "drmat/series.hpp"

namespace drmat {

struct RMatrixOptions {
    double pole_eps = 1e-8;
    bool drop_cayley_term = false; // negative control (mutation)
    double perturb_first_ef = 0.0; // negative control: adds eps * e_a1 (x) f_a1
};

struct RMatrixValue {
    LambdaPoint lambda;
    Tensor2 tensor;
    double pole_margin = 0;
};

namespace detail {

// exact dual pairs (u_j, u^j) of h in coroot coordinates
inline std::pair<RatMat, RatMat> h_dual_pairs(const LieAlgebra& g) {
    RatMat basis = rat_identity(g.rank);
    RatMat G(g.rank, RatVec(g.rank));
    for (int i = 0; i < g.rank; ++i)
        for (int j = 0; j < g.rank; ++j) G[i][j] = g.form[g.h_index(i)][g.h_index(j)];
    RatMat dual(g.rank, RatVec(g.rank));
    for (int i = 0; i < g.rank; ++i) {
        RatVec e(g.rank, Rat(0));
        e[i] = Rat(1);
        RatVec x = rat_solve(G, e);
        dual[i] = x; // coordinates of u^i over h-basis
    }
    return {basis, dual};
}

// walk the B-chain from root a: returns (root index, multiplier) for B^l f_a,
// l = 1..max_steps, stopping when B kills the vector.
inline std::vector<std::pair<int, Rat>> b_chain(const TripleAnalysis& an, int a,
                                                int max_steps) {
    std::vector<std::pair<int, Rat>> chain;
    int cur = a;
    Rat coef(1);
    for (int l = 1; l <= max_steps; ++l) {
        auto it = an.b_f_image.find(cur);
        if (it == an.b_f_image.end()) break;
        coef *= it->second.second;
        cur = it->second.first;
        chain.emplace_back(cur, coef);
    }
    return chain;
}

} // namespace detail

// Cartan block of r_T: -1/2 Omega_h + 1/2 sum_{I2} C_T x_i (x) x_i, exact.
inline Tensor2 r_cartan_part(const TripleAnalysis& an, const RMatrixOptions& opt = {}) {
    const LieAlgebra& g = *an.alg;
    Tensor2 out(g);
    auto [basis, dual] = detail::h_dual_pairs(g);
    const RatMat& cay = an.cayley_h;
    for (int j = 0; j < g.rank; ++j) {
        // -1/2 u_j (x) u^j  (+ 1/2 (C_T P0 u_j) (x) u^j)
        for (int k = 0; k < g.rank; ++k) {
            if (dual[j][k] == Rat(0)) continue;
            out.add({g.h_index(j), g.h_index(k)}, -0.5 * to_double(dual[j][k]));
            if (!opt.drop_cayley_term)
                for (int m = 0; m < g.rank; ++m)
                    if (cay[m][j] != Rat(0))
                        out.add({g.h_index(m), g.h_index(k)},
                                0.5 * to_double(cay[m][j] * dual[j][k]));
        }
    }
    return out;
}

inline RMatrixValue eval_r(const TripleAnalysis& an, const LambdaPoint& lam,
                           const RMatrixOptions& opt = {}) {
    const LieAlgebra& g = *an.alg;
    if (!an.nondegenerate) throw DegenerateTriple("eval_r needs a nondegenerate triple");
    RMatrixValue out;
    out.lambda = lam;
    out.pole_margin = pole_margin(an, lam);
    if (out.pole_margin < opt.pole_eps)
        throw NearPole("pole margin " + std::to_string(out.pole_margin));
    out.tensor = r_cartan_part(an, opt);
    Tensor2& r = out.tensor;
    for (int a = 0; a < g.num_pos; ++a) {
        r.add({g.f_index(a), g.e_index(a)}, -1.0);
        cplx x = std::exp(-lam.pair_root(g.roots.positive[a]));
        auto itN = an.n_table.find(a);
        if (itN != an.n_table.end()) {
            int n = itN->second;
            cplx denom = 1.0 - to_double(an.theta_table.at(a)) * std::pow(x, n);
            auto chain = detail::b_chain(an, a, n);
            cplx xl = 1.0;
            for (int l = 1; l <= n; ++l) {
                xl *= x;
                auto [b, coef] = chain[l - 1];
                cplx c = xl / denom * to_double(coef);
                r.add({g.e_index(a), g.f_index(b)}, c);
                r.add({g.f_index(b), g.e_index(a)}, -c);
            }
        } else {
            auto chain = detail::b_chain(an, a, g.num_pos + 1);
            cplx xl = 1.0;
            for (std::size_t l = 1; l <= chain.size(); ++l) {
                xl *= x;
                auto [b, coef] = chain[l - 1];
                cplx c = xl * to_double(coef);
                r.add({g.e_index(a), g.f_index(b)}, c);
                r.add({g.f_index(b), g.e_index(a)}, -c);
            }
        }
    }
    if (opt.perturb_first_ef != 0.0)
        r.add({g.e_index(0), g.f_index(0)}, opt.perturb_first_ef);
    return out;
}

// d r / d s_a, the derivative of the wedge block of root a with respect to
// the scalar s_a = (a, lambda); Cartan and f(x)e blocks are constant.
inline Tensor2 eval_r_partial_root(const TripleAnalysis& an, const LambdaPoint& lam, int a) {
    const LieAlgebra& g = *an.alg;
    Tensor2 out(g);
    cplx x = std::exp(-lam.pair_root(g.roots.positive[a]));
    auto itN = an.n_table.find(a);
    if (itN != an.n_table.end()) {
        int n = itN->second;
        cplx theta = to_double(an.theta_table.at(a));
        cplx X = std::pow(x, n);
        cplx denom = 1.0 - theta * X;
        auto chain = detail::b_chain(an, a, n);
        cplx xl = 1.0;
        for (int l = 1; l <= n; ++l) {
            xl *= x;
            auto [b, coef] = chain[l - 1];
            // d/ds [ x^l / (1 - theta x^n) ] with x = e^{-s}
            cplx c = (-static_cast<double>(l) * xl / denom -
                      xl * theta * static_cast<double>(n) * X / (denom * denom)) *
                     to_double(coef);
            out.add({g.e_index(a), g.f_index(b)}, c);
            out.add({g.f_index(b), g.e_index(a)}, -c);
        }
    } else {
        auto chain = detail::b_chain(an, a, g.num_pos + 1);
        cplx xl = 1.0;
        for (std::size_t l = 1; l <= chain.size(); ++l) {
            xl *= x;
            auto [b, coef] = chain[l - 1];
            cplx c = -static_cast<double>(l) * xl * to_double(coef);
            out.add({g.e_index(a), g.f_index(b)}, c);
            out.add({g.f_index(b), g.e_index(a)}, -c);
        }
    }
    return out;
}

// Formal expansion of the wedge block plus constant parts: coefficient
// tensors indexed by lattice points l*a, heights <= cap.
inline LatticeSeries<Tensor2> expand_r_series(const TripleAnalysis& an, int height_cap,
                                              const RMatrixOptions& opt = {}) {
    if (height_cap < 1) throw Error("expand_r_series: cap must be >= 1");
    const LieAlgebra& g = *an.alg;
    LatticeSeries<Tensor2> s(g.rank, height_cap);
    Lattice zero(g.rank, 0);
    Tensor2 c0 = r_cartan_part(an, opt);
    for (int a = 0; a < g.num_pos; ++a) c0.add({g.f_index(a), g.e_index(a)}, -1.0);
    if (opt.perturb_first_ef != 0.0)
        c0.add({g.e_index(0), g.f_index(0)}, opt.perturb_first_ef);
    s.add(zero, c0);
    for (int a = 0; a < g.num_pos; ++a) {
        int ht = g.roots.heights[a];
        int lmax = height_cap / ht;
        auto itN = an.n_table.find(a);
        Lattice key(g.rank, 0);
        if (itN != an.n_table.end()) {
            int n = itN->second;
            auto chain = detail::b_chain(an, a, n);
            Rat theta = an.theta_table.at(a);
            for (int l = 1; l <= lmax; ++l) {
                int l0 = (l - 1) % n;         // chain entry for B^l
                int wraps = (l - 1 - l0) / n; // each full period contributes theta
                Rat coef = chain[l0].second;
                for (int w = 0; w < wraps; ++w) coef *= theta;
                int b = chain[l0].first;
                Tensor2 t(g);
                t.add({g.e_index(a), g.f_index(b)}, to_double(coef));
                t.add({g.f_index(b), g.e_index(a)}, -to_double(coef));
                for (int k = 0; k < g.rank; ++k) key[k] = l * g.roots.positive[a][k];
                s.add(key, t);
            }
        } else {
            auto chain = detail::b_chain(an, a, lmax);
            for (std::size_t l = 1; l <= chain.size(); ++l) {
                auto [b, coef] = chain[l - 1];
                Tensor2 t(g);
                t.add({g.e_index(a), g.f_index(b)}, to_double(coef));
                t.add({g.f_index(b), g.e_index(a)}, -to_double(coef));
                for (int k = 0; k < g.rank; ++k)
                    key[k] = static_cast<int>(l) * g.roots.positive[a][k];
                s.add(key, t);
            }
        }
    }
    return s;
}

// Sum an r-series at a concrete lambda (series/closed-form consistency oracle).
inline Tensor2 sum_r_series(const LatticeSeries<Tensor2>& s, const LieAlgebra& g,
                            const LambdaPoint& lam) {
    Tensor2 out(g);
    for (auto& [key, t] : s.terms) {
        cplx w = std::exp(-lam.pair_lattice(key));
        Tensor2 scaled = t;
        scaled *= w;
        out += scaled;
    }
    return out;
}

struct CdybeReport {
    double residual_norm = 0;
    double method_disagreement = 0; // analytic vs finite differences
    double pole_margin = 0;
    std::string method;
};

namespace detail {

inline Tensor3 cdybe_lhs(const TripleAnalysis& an, const LambdaPoint& lam,
                         const RMatrixOptions& opt) {
    const LieAlgebra& g = *an.alg;
    Tensor2 r = eval_r(an, lam, opt).tensor;
    Tensor3 lhs = bracket_embedded(r, {1, 2}, r, {1, 3});
    lhs += bracket_embedded(r, {1, 3}, r, {2, 3});
    lhs += bracket_embedded(r, {1, 2}, r, {2, 3});
    // sum_a P_l(a^sharp)^{(k)} (x) dr/ds_a, signs (+,-,+) on slots (1,2,3)
    for (int a = 0; a < g.num_pos; ++a) {
        RatVec pl = an.project_l_sharp(g.roots.positive[a]);
        AlgebraElement xa(g);
        bool nonzero = false;
        for (int k = 0; k < g.rank; ++k)
            if (pl[k] != Rat(0)) {
                xa.add(g.h_index(k), to_double(pl[k]));
                nonzero = true;
            }
        if (!nonzero) continue;
        Tensor2 dr = eval_r_partial_root(an, lam, a);
        lhs += slot_tensor(xa, 1, dr);
        Tensor3 t2 = slot_tensor(xa, 2, dr);
        t2 *= -1.0;
        lhs += t2;
        lhs += slot_tensor(xa, 3, dr);
    }
    return lhs;
}

} // namespace detail

// Directional derivative of r along the I1 direction j, analytic or by
// central differences (Richardson); used for the method cross-check.
inline Tensor2 r_directional_derivative(const TripleAnalysis& an, const LambdaPoint& lam,
                                        int j, bool finite_difference,
                                        const RMatrixOptions& opt = {}) {
    const LieAlgebra& g = *an.alg;
    const auto& xj = an.I1_num[j];
    if (!finite_difference) {
        Tensor2 out(g);
        for (int a = 0; a < g.num_pos; ++a) {
            double proj = 0; // (alpha, x_j)
            for (int k = 0; k < g.rank; ++k)
                proj += xj[k] * static_cast<double>(g.cartan_pairing(g.roots.positive[a], k));
            if (std::abs(proj) < 1e-15) continue;
            Tensor2 d = eval_r_partial_root(an, lam, a);
            d *= proj;
            out += d;
        }
        return out;
    }
    auto at = [&](double eps) {
        LambdaPoint lp = lam;
        for (int i = 0; i < g.rank; ++i) {
            RootVec ai(g.rank, 0);
            ai[i] = 1;
            double proj = 0;
            for (int k = 0; k < g.rank; ++k)
                proj += xj[k] * static_cast<double>(g.cartan_pairing(ai, k));
            lp.simple_pairings[i] += eps * proj;
        }
        return eval_r(an, lp, opt).tensor;
    };
    double h = 1e-5;
    Tensor2 d1 = at(h);
    d1 -= at(-h);
    d1 *= 8.0;
    Tensor2 d2 = at(2 * h);
    d2 -= at(-2 * h);
    d2 *= -1.0;
    d1 += d2;
    d1 *= 1.0 / (12.0 * h);
    return d1;
}

inline CdybeReport cdybe_residual(const TripleAnalysis& an, const LambdaPoint& lam,
                                  const std::string& method = "analytic",
                                  const RMatrixOptions& opt = {}) {
    CdybeReport rep;
    rep.method = method;
    rep.pole_margin = pole_margin(an, lam);
    Tensor3 lhs = detail::cdybe_lhs(an, lam, opt);
    rep.residual_norm = lhs.norm();
    if (method == "fd-crosscheck") {
        double dis = 0;
        for (int j = 0; j < an.dim_l(); ++j) {
            Tensor2 da = r_directional_derivative(an, lam, j, false, opt);
            Tensor2 df = r_directional_derivative(an, lam, j, true, opt);
            da -= df;
            dis = std::max(dis, da.norm());
        }
        rep.method_disagreement = dis;
        if (dis > 1e-4)
            throw MethodDisagreement("analytic vs FD derivative differ by " +
                                     std::to_string(dis));
    }
    return rep;
}

} // namespace drmat
