#pragma once

// Positive-root closure from a finite-type Cartan datum, heights, and the
// exact bilinear form on the root lattice (long roots normalized to
// squared length 2).

#include <algorithm>
#include <map>
#include <vector>

#include "drmat/cartan.hpp"

namespace drmat {

using RootVec = std::vector<int>; // coordinates over simple roots

struct RootSystem {
    int rank = 0;
    std::vector<RootVec> positive; // sorted by height, then lex
    std::vector<int> heights;
    RatMat gram;                             // (alpha_i, alpha_j) = d_i a_ij
    std::map<RootVec, int> index_of_root;    // positive roots only

    int height(const RootVec& b) const {
        int h = 0;
        for (int x : b) h += x;
        return h;
    }

    // (beta, gamma) for arbitrary root-lattice vectors
    Rat pairing(const RootVec& b, const RootVec& c) const {
        Rat s(0);
        for (int i = 0; i < rank; ++i) {
            if (b[i] == 0) continue;
            for (int j = 0; j < rank; ++j)
                if (c[j] != 0) s += Rat(b[i]) * Rat(c[j]) * gram[i][j];
        }
        return s;
    }

    bool is_positive_root(const RootVec& b) const {
        return index_of_root.count(b) > 0;
    }

    // true if b or -b is a (positive) root
    bool is_root(const RootVec& b) const {
        if (is_positive_root(b)) return true;
        RootVec nb(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) nb[i] = -b[i];
        return is_positive_root(nb);
    }
};

inline RootSystem build_root_system(const CartanDatum& cartan) {
    RootSystem rs;
    int n = cartan.rank;
    rs.rank = n;
    rs.gram = rat_zeros(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rs.gram[i][j] = cartan.d[i] * Rat(cartan.a[i][j]);

    // Closure by height: beta + alpha_i is a root iff the alpha_i-string
    // through beta has q = p - <beta, alpha_i^vee> > 0, where p is the
    // length of the descending string (all of smaller height, known).
    std::map<RootVec, bool> seen;
    std::vector<std::vector<RootVec>> by_height;
    by_height.emplace_back();
    for (int i = 0; i < n; ++i) {
        RootVec a(n, 0);
        a[i] = 1;
        by_height[0].push_back(a);
        seen[a] = true;
    }
    for (int h = 0; !by_height[h].empty(); ++h) {
        by_height.emplace_back();
        for (const RootVec& beta : by_height[h]) {
            for (int i = 0; i < n; ++i) {
                // <beta, alpha_i^vee> = sum_j beta_j a_ij
                long long cart = 0;
                for (int j = 0; j < n; ++j) cart += static_cast<long long>(beta[j]) * cartan.a[i][j];
                int p = 0;
                RootVec down = beta;
                for (;;) {
                    down[i] -= 1;
                    bool neg_simple = false; // -alpha_i counts as a root
                    bool all_zero = true, any_neg = false;
                    for (int x : down) {
                        if (x != 0) all_zero = false;
                        if (x < 0) any_neg = true;
                    }
                    if (any_neg) {
                        RootVec md(n);
                        for (int k = 0; k < n; ++k) md[k] = -down[k];
                        neg_simple = seen.count(md) > 0;
                        if (!neg_simple) break;
                    } else if (all_zero) {
                        break; // beta - p alpha_i hit zero: not a root, stop
                    } else if (!seen.count(down)) {
                        break;
                    }
                    (void)neg_simple;
                    ++p;
                }
                if (p - cart > 0) {
                    RootVec up = beta;
                    up[i] += 1;
                    if (!seen.count(up)) {
                        seen[up] = true;
                        by_height[h + 1].push_back(up);
                    }
                }
            }
        }
    }
    for (auto& level : by_height) std::sort(level.begin(), level.end());
    for (std::size_t h = 0; h < by_height.size(); ++h) {
        for (const RootVec& r : by_height[h]) {
            rs.index_of_root[r] = static_cast<int>(rs.positive.size());
            rs.positive.push_back(r);
            rs.heights.push_back(static_cast<int>(h) + 1);
        }
    }
    return rs;
}

} // namespace drmat
