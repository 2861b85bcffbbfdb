#pragma once

// Sparse elements of g, g(x)g and g(x)g(x)g over the canonical basis,
// with the bracket operations the CDYBE checks need.  Coefficients are
// complex doubles; exactness lives one layer down in the bracket tables.

#include <array>
#include <cmath>
#include <map>
#include <optional>

#include "drmat/liealg.hpp"

namespace drmat {

constexpr double kSparseEps = 1e-300; // drop exact zeros only

struct AlgebraElement {
    const LieAlgebra* alg = nullptr;
    std::map<int, cplx> c;

    AlgebraElement() = default;
    explicit AlgebraElement(const LieAlgebra& g) : alg(&g) {}

    static AlgebraElement basis(const LieAlgebra& g, int idx) {
        AlgebraElement x(g);
        x.c[idx] = 1.0;
        return x;
    }

    AlgebraElement& add(int idx, cplx v) {
        auto [it, fresh] = c.try_emplace(idx, v);
        if (!fresh) it->second += v;
        return *this;
    }

    AlgebraElement& operator+=(const AlgebraElement& o) {
        for (auto& [i, v] : o.c) add(i, v);
        return *this;
    }
    AlgebraElement& operator*=(cplx s) {
        for (auto& [i, v] : c) v *= s;
        return *this;
    }

    double norm() const {
        double s = 0;
        for (auto& [i, v] : c) s += std::norm(v);
        return std::sqrt(s);
    }

    // declared weight if all components agree, else nullopt
    std::optional<RootVec> weight_if_homogeneous() const {
        std::optional<RootVec> w;
        for (auto& [i, v] : c) {
            if (std::abs(v) < kSparseEps) continue;
            RootVec wi = alg->weight_of_basis(i);
            if (!w) w = wi;
            else if (*w != wi) return std::nullopt;
        }
        if (!w) w = RootVec(alg->rank, 0);
        return w;
    }
};

inline AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
    if (x.alg != y.alg) throw AlgebraMismatch("bracket of elements over different algebras");
    AlgebraElement out(*x.alg);
    for (auto& [i, xv] : x.c)
        for (auto& [j, yv] : y.c)
            for (auto& [k, n] : x.alg->bracket_basis(i, j)) out.add(k, xv * yv * to_double(n));
    return out;
}

inline cplx form_pairing(const AlgebraElement& x, const AlgebraElement& y) {
    cplx s = 0;
    for (auto& [i, xv] : x.c)
        for (auto& [j, yv] : y.c) {
            const Rat& f = x.alg->form[i][j];
            if (f != Rat(0)) s += xv * yv * to_double(f);
        }
    return s;
}

template <int Rank>
struct Tensor {
    static_assert(Rank == 2 || Rank == 3);
    using Key = std::array<int, Rank>;
    const LieAlgebra* alg = nullptr;
    std::map<Key, cplx> c;

    Tensor() = default;
    explicit Tensor(const LieAlgebra& g) : alg(&g) {}

    Tensor& add(const Key& k, cplx v) {
        auto [it, fresh] = c.try_emplace(k, v);
        if (!fresh) it->second += v;
        return *this;
    }
    Tensor& operator+=(const Tensor& o) {
        for (auto& [k, v] : o.c) add(k, v);
        return *this;
    }
    Tensor& operator-=(const Tensor& o) {
        for (auto& [k, v] : o.c) add(k, -v);
        return *this;
    }
    Tensor& operator*=(cplx s) {
        for (auto& [k, v] : c) v *= s;
        return *this;
    }
    double norm() const {
        double s = 0;
        for (auto& [k, v] : c) s += std::norm(v);
        return std::sqrt(s);
    }
    cplx coeff(const Key& k) const {
        auto it = c.find(k);
        return it == c.end() ? cplx(0) : it->second;
    }
};

using Tensor2 = Tensor<2>;
using Tensor3 = Tensor<3>;

inline Tensor2 swap_legs(const Tensor2& t) {
    Tensor2 out(*t.alg);
    for (auto& [k, v] : t.c) out.add({k[1], k[0]}, v);
    return out;
}

inline Tensor2 tensor_product(const AlgebraElement& x, const AlgebraElement& y) {
    if (x.alg != y.alg) throw AlgebraMismatch("tensor of elements over different algebras");
    Tensor2 out(*x.alg);
    for (auto& [i, xv] : x.c)
        for (auto& [j, yv] : y.c) out.add({i, j}, xv * yv);
    return out;
}

// x (tensor) y - y (tensor) x
inline Tensor2 wedge(const AlgebraElement& x, const AlgebraElement& y) {
    Tensor2 out = tensor_product(x, y);
    out -= tensor_product(y, x);
    return out;
}

// ad action of x on one tensor slot: [x, .]_slot
template <int Rank>
Tensor<Rank> tensor_act(const AlgebraElement& x, int slot, const Tensor<Rank>& t) {
    if (slot < 1 || slot > Rank) throw BadSlot("slot " + std::to_string(slot));
    if (x.alg != t.alg) throw AlgebraMismatch("tensor_act operands");
    Tensor<Rank> out(*t.alg);
    for (auto& [k, tv] : t.c)
        for (auto& [i, xv] : x.c)
            for (auto& [m, n] : t.alg->bracket_basis(i, k[slot - 1])) {
                auto key = k;
                key[slot - 1] = m;
                out.add(key, xv * tv * to_double(n));
            }
    return out;
}

// Embed a two-leg tensor into three slots: place leg 1 at slot s1, leg 2 at
// slot s2, identity-pad elsewhere is implicit (used only inside brackets).
// [r^{s1a s2a}, s^{s1b s2b}] on g (x) g (x) g:
// shared slot gets the bracket, distinct slots pass through.
inline Tensor3 bracket_embedded(const Tensor2& r, std::array<int, 2> ra,
                                const Tensor2& s, std::array<int, 2> sa) {
    const LieAlgebra& g = *r.alg;
    Tensor3 out(g);
    for (auto& [kr, rv] : r.c)
        for (auto& [ks, sv] : s.c) {
            // positions: build occupancy of the 3 slots
            std::array<std::vector<int>, 4> occ; // slot -> basis indices (1-based slots)
            occ[ra[0]].push_back(kr[0]);
            occ[ra[1]].push_back(kr[1]);
            occ[sa[0]].push_back(ks[0]);
            occ[sa[1]].push_back(ks[1]);
            int shared = -1;
            for (int s3 = 1; s3 <= 3; ++s3)
                if (occ[s3].size() == 2) shared = s3;
            // exactly one shared slot when ra and sa overlap in one position
            std::array<int, 3> key{};
            for (int s3 = 1; s3 <= 3; ++s3)
                if (occ[s3].size() == 1) key[s3 - 1] = occ[s3][0];
            for (auto& [m, n] : g.bracket_basis(occ[shared][0], occ[shared][1])) {
                key[shared - 1] = m;
                out.add(key, rv * sv * to_double(n));
            }
        }
    return out;
}

// Place x in the given slot against a 2-tensor in the remaining two slots
// (ascending), e.g. slot=1: x (x) t.
inline Tensor3 slot_tensor(const AlgebraElement& x, int slot, const Tensor2& t) {
    Tensor3 out(*t.alg);
    std::array<int, 2> rest{};
    int p = 0;
    for (int s = 1; s <= 3; ++s)
        if (s != slot) rest[p++] = s;
    for (auto& [i, xv] : x.c)
        for (auto& [k, tv] : t.c) {
            std::array<int, 3> key{};
            key[slot - 1] = i;
            key[rest[0] - 1] = k[0];
            key[rest[1] - 1] = k[1];
            out.add(key, xv * tv);
        }
    return out;
}

// Casimir Omega from exact dual bases: sum (e_a (x) f_a + f_a (x) e_a)
// + Omega_h, with Omega_h = sum_i u_i (x) u^i over any basis of h and its
// form-dual.
inline Tensor2 casimir_omega_exact(const LieAlgebra& g) {
    Tensor2 omega(g);
    for (int a = 0; a < g.num_pos; ++a) {
        omega.add({g.e_index(a), g.f_index(a)}, 1.0);
        omega.add({g.f_index(a), g.e_index(a)}, 1.0);
    }
    // dual basis of {h_i}: solve G x = delta_i with G the h-block Gram
    RatMat G = rat_zeros(g.rank, g.rank);
    for (int i = 0; i < g.rank; ++i)
        for (int j = 0; j < g.rank; ++j)
            G[i][j] = g.form[g.h_index(i)][g.h_index(j)];
    for (int i = 0; i < g.rank; ++i) {
        RatVec ei(g.rank, Rat(0));
        ei[i] = Rat(1);
        RatVec dual = rat_solve(G, ei); // coordinates of h^i over h-basis
        for (int j = 0; j < g.rank; ++j)
            if (dual[j] != Rat(0))
                omega.add({g.h_index(i), g.h_index(j)}, to_double(dual[j]));
    }
    return omega;
}

// Spec operation: Omega from a user-supplied orthonormal basis of h.
inline Tensor2 casimir_omega(const LieAlgebra& g,
                             const std::vector<AlgebraElement>& basis_of_h) {
    double dev = 0;
    for (std::size_t i = 0; i < basis_of_h.size(); ++i)
        for (std::size_t j = 0; j < basis_of_h.size(); ++j) {
            cplx p = form_pairing(basis_of_h[i], basis_of_h[j]);
            dev = std::max(dev, std::abs(p - (i == j ? cplx(1) : cplx(0))));
        }
    if (dev > 1e-12 || static_cast<int>(basis_of_h.size()) != g.rank)
        throw NonOrthonormalBasis("Gram deviation " + std::to_string(dev));
    Tensor2 omega(g);
    for (int a = 0; a < g.num_pos; ++a) {
        omega.add({g.e_index(a), g.f_index(a)}, 1.0);
        omega.add({g.f_index(a), g.e_index(a)}, 1.0);
    }
    for (const auto& x : basis_of_h)
        for (auto& [i, xi] : x.c)
            for (auto& [j, xj] : x.c) omega.add({i, j}, xi * xj);
    return omega;
}

} // namespace drmat
