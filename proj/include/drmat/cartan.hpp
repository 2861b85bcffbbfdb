#pragma once

// Finite-type Cartan matrices: named series A..G, explicit matrices,
// symmetrizers, and the positive-definiteness gate.

#include <cctype>
#include <string>
#include <vector>

#include "drmat/rational.hpp"

namespace drmat {

struct CartanDatum {
    std::vector<std::vector<int>> a; // Cartan matrix a_ij
    std::string type_label;          // e.g. "A2", "G2", or "custom"
    RatVec d;                        // symmetrizer, d_i a_ij = d_j a_ji,
                                     // normalized so long roots have (a,a)=2
    int rank = 0;
};

namespace detail {

inline std::vector<std::vector<int>> named_cartan(char series, int n) {
    auto A = std::vector<std::vector<int>>(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i) A[i][i] = 2;
    auto link = [&](int i, int j) { A[i][j] = -1; A[j][i] = -1; };
    switch (series) {
    case 'A':
        for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
        break;
    case 'B': // long chain, last root short: a_{n-1,n} = -2? convention below
        for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
        // B_n: alpha_n short; <alpha_{n-1}, alpha_n^vee> = -2
        A[n - 1][n - 2] = -2;
        break;
    case 'C':
        for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
        A[n - 2][n - 1] = -2;
        break;
    case 'D':
        for (int i = 0; i + 1 < n - 1; ++i) link(i, i + 1);
        link(n - 3, n - 1);
        break;
    case 'E':
        // Bourbaki numbering: node 1 attached to node 3; node 2 to node 4.
        {
            link(0, 2); link(2, 3); link(1, 3); link(3, 4);
            for (int i = 4; i + 1 < n; ++i) link(i, i + 1);
        }
        break;
    case 'F': // F4: 1-2=>3-4, alpha_1,alpha_2 long
        link(0, 1); link(2, 3);
        A[1][2] = -1; A[2][1] = -2;
        break;
    case 'G': // G2: alpha_1 long per a_21 = -3
        A[0][1] = -1; A[1][0] = -3;
        break;
    default:
        throw NotFiniteType(std::string("unknown series ") + series);
    }
    return A;
}

inline void validate_gcm(const std::vector<std::vector<int>>& a) {
    int n = static_cast<int>(a.size());
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(a[i].size()) != n) throw NotFiniteType("matrix not square");
        if (a[i][i] != 2) throw NotFiniteType("diagonal entry != 2");
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (a[i][j] > 0) throw NotFiniteType("positive off-diagonal entry");
            if ((a[i][j] == 0) != (a[j][i] == 0))
                throw NotFiniteType("a_ij = 0 but a_ji != 0");
        }
    }
}

// Solve d_i a_ij = d_j a_ji over each connected component, then scale so
// max d_i = 1 (long roots get squared length 2, (a_i,a_i) = 2 d_i).
inline RatVec symmetrizer(const std::vector<std::vector<int>>& a) {
    int n = static_cast<int>(a.size());
    RatVec d(n, Rat(0));
    for (int start = 0; start < n; ++start) {
        if (d[start] != Rat(0)) continue;
        d[start] = Rat(1);
        std::vector<int> stack{start};
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            for (int j = 0; j < n; ++j) {
                if (i == j || a[i][j] == 0) continue;
                Rat dj = d[i] * Rat(a[i][j]) / Rat(a[j][i]);
                if (d[j] == Rat(0)) {
                    d[j] = dj;
                    stack.push_back(j);
                } else if (d[j] != dj) {
                    throw NotFiniteType("matrix is not symmetrizable");
                }
            }
        }
    }
    Rat dmax = d[0];
    for (const Rat& x : d) dmax = std::max(dmax, x);
    for (Rat& x : d) x /= dmax;
    return d;
}

} // namespace detail

inline CartanDatum cartan_from_matrix(const std::vector<std::vector<int>>& a,
                                      std::string label = "custom") {
    detail::validate_gcm(a);
    int n = static_cast<int>(a.size());
    if (n > 8) throw UnsupportedRank("rank " + std::to_string(n) + " exceeds cap 8");
    CartanDatum c;
    c.a = a;
    c.rank = n;
    c.type_label = std::move(label);
    c.d = detail::symmetrizer(a);
    // symmetrized matrix s_ij = d_i a_ij must be positive definite
    RatMat s = rat_zeros(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s[i][j] = c.d[i] * Rat(a[i][j]);
    if (!rat_positive_definite(s))
        throw NotFiniteType("symmetrized Cartan matrix is not positive definite");
    return c;
}

inline CartanDatum cartan_from_type(char series, int n) {
    if (n < 1) throw NotFiniteType("rank must be positive");
    if (n > 8) throw UnsupportedRank("rank " + std::to_string(n) + " exceeds cap 8");
    bool ok = true;
    switch (series) {
    case 'A': ok = n >= 1; break;
    case 'B': ok = n >= 2; break;
    case 'C': ok = n >= 2; break;
    case 'D': ok = n >= 3; break;
    case 'E': ok = n >= 6 && n <= 8; break;
    case 'F': ok = n == 4; break;
    case 'G': ok = n == 2; break;
    default: ok = false;
    }
    if (!ok) throw NotFiniteType(std::string(1, series) + std::to_string(n) +
                                 " is not a finite type");
    return cartan_from_matrix(detail::named_cartan(series, n),
                              std::string(1, series) + std::to_string(n));
}

// "A2", "g2", ... convenience.
inline CartanDatum cartan_from_label(const std::string& label) {
    if (label.size() < 2) throw NotFiniteType("bad type label: " + label);
    char series = static_cast<char>(std::toupper(label[0]));
    int n = std::stoi(label.substr(1));
    return cartan_from_type(series, n);
}

} // namespace drmat
