#pragma once

// Exact rational scalars and small dense rational linear algebra.
// Everything combinatorial (structure constants, invariant form, Cayley
// transform, twist eigenvalues) is computed here exactly; conversion to
// floating point is one-way.

#include <boost/rational.hpp>
#include <complex>
#include <cstdint>
#include <vector>

#include "drmat/errors.hpp"

namespace drmat {

using Rat = boost::rational<long long>;
using cplx = std::complex<double>;

inline double to_double(const Rat& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline cplx to_cplx(const Rat& r) { return cplx(to_double(r), 0.0); }

using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>; // row major

inline RatMat rat_zeros(std::size_t rows, std::size_t cols) {
    return RatMat(rows, RatVec(cols, Rat(0)));
}

inline RatMat rat_identity(std::size_t n) {
    RatMat m = rat_zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = Rat(1);
    return m;
}

inline RatVec rat_mat_vec(const RatMat& m, const RatVec& v) {
    RatVec out(m.size(), Rat(0));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            if (m[i][j] != Rat(0) && v[j] != Rat(0)) out[i] += m[i][j] * v[j];
    return out;
}

inline RatMat rat_mat_mul(const RatMat& a, const RatMat& b) {
    std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    RatMat out = rat_zeros(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            if (a[i][l] != Rat(0))
                for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][l] * b[l][j];
    return out;
}

// Reduced row echelon form in place; returns pivot column indices.
inline std::vector<int> rat_rref(RatMat& m) {
    std::vector<int> pivots;
    if (m.empty()) return pivots;
    std::size_t rows = m.size(), cols = m[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && m[piv][c] == Rat(0)) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[r]);
        Rat inv = Rat(1) / m[r][c];
        for (std::size_t j = c; j < cols; ++j) m[r][j] *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == Rat(0)) continue;
            Rat f = m[i][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(static_cast<int>(c));
        ++r;
    }
    return pivots;
}

inline std::size_t rat_rank(RatMat m) { return rat_rref(m).size(); }

// Basis of the nullspace of m (as rows of the returned matrix).
inline RatMat rat_kernel(RatMat m) {
    if (m.empty()) return {};
    std::size_t cols = m[0].size();
    std::vector<int> pivots = rat_rref(m);
    std::vector<bool> is_pivot(cols, false);
    for (int p : pivots) is_pivot[p] = true;
    RatMat basis;
    for (std::size_t free_c = 0; free_c < cols; ++free_c) {
        if (is_pivot[free_c]) continue;
        RatVec v(cols, Rat(0));
        v[free_c] = Rat(1);
        for (std::size_t pr = 0; pr < pivots.size(); ++pr) {
            // row pr has pivot at pivots[pr]
            v[pivots[pr]] = -m[pr][free_c];
        }
        basis.push_back(v);
    }
    return basis;
}

// Solve m x = b exactly. Throws if inconsistent; requires unique solution
// (full column rank). m may be rectangular with rows >= cols.
inline RatVec rat_solve(RatMat m, RatVec b) {
    std::size_t rows = m.size();
    std::size_t cols = rows ? m[0].size() : 0;
    for (std::size_t i = 0; i < rows; ++i) m[i].push_back(b[i]);
    std::vector<int> pivots = rat_rref(m);
    RatVec x(cols, Rat(0));
    std::size_t r = 0;
    for (int p : pivots) {
        if (static_cast<std::size_t>(p) == cols)
            throw Error("rat_solve: inconsistent system");
        x[p] = m[r][cols];
        ++r;
    }
    if (pivots.size() < cols) throw Error("rat_solve: underdetermined system");
    // Consistency of the remaining rows is implied by rref; verify anyway.
    return x;
}

inline Rat rat_det(RatMat m) {
    std::size_t n = m.size();
    Rat det(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && m[piv][c] == Rat(0)) ++piv;
        if (piv == n) return Rat(0);
        if (piv != c) {
            std::swap(m[piv], m[c]);
            det = -det;
        }
        det *= m[c][c];
        Rat inv = Rat(1) / m[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            if (m[i][c] == Rat(0)) continue;
            Rat f = m[i][c] * inv;
            for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
        }
    }
    return det;
}

// Sylvester criterion on an exact symmetric matrix.
inline bool rat_positive_definite(const RatMat& m) {
    std::size_t n = m.size();
    for (std::size_t k = 1; k <= n; ++k) {
        RatMat minor_(k, RatVec(k));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) minor_[i][j] = m[i][j];
        if (rat_det(minor_) <= Rat(0)) return false;
    }
    return true;
}

} // namespace drmat
