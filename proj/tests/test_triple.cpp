#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "drmat/triple.hpp"

using namespace drmat;

namespace {
TripleSpec swap_a2() {
    TripleSpec s;
    s.gamma1 = {0, 1};
    s.gamma2 = {0, 1};
    s.t_map = {{0, 1}, {1, 0}};
    return s;
}
TripleSpec chain_a3() {
    TripleSpec s;
    s.gamma1 = {0, 1};
    s.gamma2 = {1, 2};
    s.t_map = {{0, 1}, {1, 2}};
    return s;
}
} // namespace

TEST_CASE("validate_triple") {
    LieAlgebra a2 = build_simple_lie_algebra("A2");
    CHECK_NOTHROW(validate_triple(a2, swap_a2()));

    TripleSpec single;
    single.gamma1 = {0};
    single.gamma2 = {1};
    single.t_map = {{0, 1}};
    CHECK_NOTHROW(validate_triple(a2, single));

    LieAlgebra b2 = build_simple_lie_algebra("B2");
    TripleSpec bad = single; // long -> short in B2
    CHECK_THROWS_AS(validate_triple(b2, bad), NotIsometric);

    TripleSpec notbij;
    notbij.gamma1 = {0, 1};
    notbij.gamma2 = {0};
    notbij.t_map = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(validate_triple(a2, notbij), NotBijective);
}

TEST_CASE("identity triple analysis") {
    for (const char* label : {"A1", "A2", "B2", "G2"}) {
        LieAlgebra g = build_simple_lie_algebra(label);
        TripleAnalysis an = analyze_triple(g, identity_triple(g));
        INFO(label);
        CHECK(an.gamma3.size() == static_cast<std::size_t>(g.rank));
        CHECK(an.dim_h0() == 0);
        CHECK(an.dim_l() == g.rank);
        CHECK(an.nondegenerate);
        for (int a = 0; a < g.num_pos; ++a) {
            REQUIRE(an.n_table.count(a) == 1);
            CHECK(an.n_table.at(a) == 1);
            CHECK(an.theta_table.at(a) == Rat(1));
        }
    }
}

TEST_CASE("A2 swap analysis") {
    LieAlgebra g = build_simple_lie_algebra("A2");
    TripleAnalysis an = analyze_triple(g, swap_a2());
    CHECK(an.gamma3 == std::set<int>{0, 1});
    CHECK(an.dim_l() == 1);
    CHECK(an.dim_h0() == 1);
    // l = C rho^sharp
    RatVec rho_sharp = g.sharp(RootVec{1, 1}); // rho = alpha1 + alpha2
    Rat ratio = an.l_basis[0][0] / rho_sharp[0];
    for (int k = 0; k < g.rank; ++k) CHECK(an.l_basis[0][k] == ratio * rho_sharp[k]);
    // N and theta
    int i1 = g.roots.index_of_root.at(RootVec{1, 0});
    int i2 = g.roots.index_of_root.at(RootVec{0, 1});
    int i12 = g.roots.index_of_root.at(RootVec{1, 1});
    CHECK(an.n_table.at(i1) == 2);
    CHECK(an.n_table.at(i2) == 2);
    CHECK(an.theta_table.at(i1) == Rat(1));
    CHECK(an.n_table.at(i12) == 1);
    CHECK(an.theta_table.at(i12) == Rat(-1));
    // involution => C_T = 0
    for (auto& row : an.cayley)
        for (auto& v : row) CHECK(v == Rat(0));

    // B images: B f_{a1} = f_{a2}, B f_{a12} = -f_{a12}
    AlgebraElement f1 = AlgebraElement::basis(g, g.f_index(i1));
    AlgebraElement img = b_apply(an, f1, 1);
    REQUIRE(img.c.size() == 1);
    CHECK(std::abs(img.c.at(g.f_index(i2)) - 1.0) < 1e-15);
    AlgebraElement f12 = AlgebraElement::basis(g, g.f_index(i12));
    AlgebraElement img12 = b_apply(an, f12, 1);
    REQUIRE(img12.c.size() == 1);
    CHECK(std::abs(img12.c.at(g.f_index(i12)) + 1.0) < 1e-15);
    CHECK_THROWS_AS(b_apply(an, AlgebraElement::basis(g, g.e_index(0)), 1), OutsideDomain);
}

TEST_CASE("A2 nilpotent chain") {
    LieAlgebra g = build_simple_lie_algebra("A2");
    TripleSpec s;
    s.gamma1 = {0};
    s.gamma2 = {1};
    s.t_map = {{0, 1}};
    TripleAnalysis an = analyze_triple(g, s);
    CHECK(an.gamma3.empty());
    int i1 = g.roots.index_of_root.at(RootVec{1, 0});
    int i2 = g.roots.index_of_root.at(RootVec{0, 1});
    int i12 = g.roots.index_of_root.at(RootVec{1, 1});
    AlgebraElement r = b_apply(an, AlgebraElement::basis(g, g.f_index(i1)), 1);
    REQUIRE(r.c.size() == 1);
    CHECK(std::abs(r.c.at(g.f_index(i2)) - 1.0) < 1e-15);
    CHECK(b_apply(an, AlgebraElement::basis(g, g.f_index(i2)), 1).norm() < 1e-15);
    CHECK(b_apply(an, AlgebraElement::basis(g, g.f_index(i12)), 1).norm() < 1e-15);
}

TEST_CASE("orbit soundness") {
    LieAlgebra g = build_simple_lie_algebra("A3");
    TripleAnalysis an = analyze_triple(g, chain_a3());
    CHECK(an.gamma3.empty());
    CHECK(an.dim_h0() == 2);
    CHECK(an.dim_l() == 1);
    // forward orbit of every Gamma1 node leaves Gamma1
    for (int i : an.gamma1) {
        int cur = i;
        bool left = false;
        for (int k = 0; k <= 4; ++k) {
            if (!an.gamma1.count(cur)) {
                left = true;
                break;
            }
            cur = an.spec.t_map.at(cur);
        }
        CHECK(left);
    }
    LieAlgebra a2 = build_simple_lie_algebra("A2");
    TripleAnalysis sw = analyze_triple(a2, swap_a2());
    for (int i : sw.gamma3) CHECK(sw.gamma3.count(sw.spec.t_map.at(i)) == 1);
}

TEST_CASE("Cayley transform on the A3 chain") {
    LieAlgebra g = build_simple_lie_algebra("A3");
    TripleAnalysis an = analyze_triple(g, chain_a3());
    REQUIRE(an.dim_h0() == 2);
    // nonzero and exactly skew w.r.t. the form
    bool nonzero = false;
    for (auto& row : an.cayley)
        for (auto& v : row) nonzero |= (v != Rat(0));
    CHECK(nonzero);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            // (C x_a, x_b) = -(x_a, C x_b) exactly, in h0 coordinates
            RatVec ea(2, Rat(0)), eb(2, Rat(0));
            ea[a] = Rat(1);
            eb[b] = Rat(1);
            RatVec ca = cayley_transform(an, ea), cb = cayley_transform(an, eb);
            auto to_h = [&](const RatVec& c) {
                RatVec y(g.rank, Rat(0));
                for (int r = 0; r < 2; ++r)
                    for (int k = 0; k < g.rank; ++k) y[k] += c[r] * an.h0_basis[r][k];
                return y;
            };
            Rat lhs = g.form_h(to_h(ca), to_h(eb));
            Rat rhs = g.form_h(to_h(ea), to_h(cb));
            CHECK(lhs == -rhs);
        }
    // defining property (alpha - T alpha, C x) = (alpha + T alpha, x), exact
    for (int xc = 0; xc < 2; ++xc) {
        RatVec x(2, Rat(0));
        x[xc] = Rat(1);
        RatVec y = cayley_transform(an, x);
        for (int i : an.gamma1) {
            int ti = an.spec.t_map.at(i);
            RootVec diff(g.rank, 0), sum(g.rank, 0);
            diff[i] += 1;
            diff[ti] -= 1;
            sum[i] += 1;
            sum[ti] += 1;
            Rat lhs(0), rhs(0);
            for (int r = 0; r < 2; ++r)
                for (int k = 0; k < g.rank; ++k) {
                    lhs += y[r] * an.h0_basis[r][k] * Rat(g.cartan_pairing(diff, k));
                    rhs += x[r] * an.h0_basis[r][k] * Rat(g.cartan_pairing(sum, k));
                }
            CHECK(lhs == rhs);
        }
    }
    // independent float least-squares solve agrees to 1e-12
    {
        int d0 = 2;
        std::vector<RootVec> diffs, sums;
        for (int i : an.gamma1) {
            int ti = an.spec.t_map.at(i);
            RootVec diff(g.rank, 0), sum(g.rank, 0);
            diff[i] += 1;
            diff[ti] -= 1;
            sum[i] += 1;
            sum[ti] += 1;
            diffs.push_back(diff);
            sums.push_back(sum);
        }
        Eigen::MatrixXd A(diffs.size(), d0);
        for (std::size_t r = 0; r < diffs.size(); ++r)
            for (int c = 0; c < d0; ++c) {
                double s = 0;
                for (int k = 0; k < g.rank; ++k)
                    s += to_double(an.h0_basis[c][k]) * static_cast<double>(g.cartan_pairing(diffs[r], k));
                A(r, c) = s;
            }
        for (int xc = 0; xc < d0; ++xc) {
            Eigen::VectorXd b(diffs.size());
            for (std::size_t r = 0; r < sums.size(); ++r) {
                double s = 0;
                for (int k = 0; k < g.rank; ++k)
                    s += to_double(an.h0_basis[xc][k]) * static_cast<double>(g.cartan_pairing(sums[r], k));
                b(r) = s;
            }
            Eigen::VectorXd y = A.colPivHouseholderQr().solve(b);
            RatVec x(d0, Rat(0));
            x[xc] = Rat(1);
            RatVec yr = cayley_transform(an, x);
            for (int r = 0; r < d0; ++r) CHECK(std::abs(y(r) - to_double(yr[r])) < 1e-12);
        }
    }
    // A3 flip (involution) has C_T = 0
    TripleSpec flip;
    flip.gamma1 = {0, 1, 2};
    flip.gamma2 = {0, 1, 2};
    flip.t_map = {{0, 2}, {1, 1}, {2, 0}};
    TripleAnalysis fa = analyze_triple(g, flip);
    for (auto& row : fa.cayley)
        for (auto& v : row) CHECK(v == Rat(0));
    CHECK(fa.gamma3.size() == 3);
}

TEST_CASE("B is a homomorphism and preserves weights") {
    LieAlgebra g = build_simple_lie_algebra("A3");
    for (const TripleSpec& s : {chain_a3(), identity_triple(g)}) {
        TripleAnalysis an = analyze_triple(g, s);
        for (int a = 0; a < g.num_pos; ++a)
            for (int b = 0; b < g.num_pos; ++b) {
                AlgebraElement fa = AlgebraElement::basis(g, g.f_index(a));
                AlgebraElement fb = AlgebraElement::basis(g, g.f_index(b));
                AlgebraElement lhs = b_apply(an, bracket(fa, fb), 1);
                AlgebraElement rhs = bracket(b_apply(an, fa, 1), b_apply(an, fb, 1));
                rhs *= -1.0;
                lhs += rhs;
                REQUIRE(lhs.norm() < 1e-13);
            }
        for (auto& [a, img] : an.b_f_image) {
            // weight(B f_alpha) = -T(alpha)
            CHECK(img.first == an.t_root.at(a));
            CHECK(img.second != Rat(0));
        }
    }
}

TEST_CASE("theta is a root of unity") {
    LieAlgebra g = build_simple_lie_algebra("A3");
    TripleSpec flip;
    flip.gamma1 = {0, 1, 2};
    flip.gamma2 = {0, 1, 2};
    flip.t_map = {{0, 2}, {1, 1}, {2, 0}};
    TripleAnalysis an = analyze_triple(g, flip);
    for (auto& [a, th] : an.theta_table) {
        CHECK((th == Rat(1) || th == Rat(-1)));
        int n = an.n_table.at(a);
        CHECK(n >= 1);
    }
}
