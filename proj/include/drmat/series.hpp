#pragma once

// Formal series over the positive root lattice Q+, truncated by height.
// Keys are lattice points in simple-root coordinates; coefficient types are
// whatever the caller needs (scalars, tensors, module-valued vectors).
//
// Two lattice points that project to the same element of l give the same
// exponential e^{-(beta,lambda)} on l*; identities are therefore checked per
// l-class, and collapse_classes provides the grouping key.

#include <map>
#include <vector>

#include "drmat/triple.hpp"

namespace drmat {

using Lattice = std::vector<int>;

inline int lattice_height(const Lattice& b) {
    int h = 0;
    for (int x : b) h += x;
    return h;
}

inline Lattice lattice_add(const Lattice& a, const Lattice& b) {
    Lattice c = a;
    for (std::size_t i = 0; i < b.size(); ++i) c[i] += b[i];
    return c;
}

template <class C>
void series_accum(C& into, const C& v) {
    into += v;
}

inline void series_accum(std::vector<cplx>& into, const std::vector<cplx>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) into[i] += v[i];
}

template <class C>
struct LatticeSeries {
    int rank = 0;
    int height_cap = 0;
    std::map<Lattice, C> terms;

    LatticeSeries() = default;
    LatticeSeries(int r, int cap) : rank(r), height_cap(cap) {}

    void add(const Lattice& key, const C& v) {
        if (lattice_height(key) > height_cap) return;
        auto [it, fresh] = terms.try_emplace(key, v);
        if (!fresh) series_accum(it->second, v);
    }
};

// l-class key of a lattice point: exact coordinates of P_l(beta^sharp).
inline std::vector<Rat> l_class_key(const TripleAnalysis& an, const Lattice& beta) {
    RootVec b(beta.begin(), beta.end());
    return an.project_l_sharp(b);
}

// Group series coefficients by (height, l-class); the caller reduces each
// group (typically by summing and taking a norm).
template <class C>
std::map<std::pair<int, std::vector<Rat>>, std::vector<const C*>>
collapse_classes(const TripleAnalysis& an, const LatticeSeries<C>& s) {
    std::map<std::pair<int, std::vector<Rat>>, std::vector<const C*>> out;
    for (auto& [key, v] : s.terms)
        out[{lattice_height(key), l_class_key(an, key)}].push_back(&v);
    return out;
}

} // namespace drmat
