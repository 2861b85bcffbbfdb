#include <catch2/catch_amalgamated.hpp>

#include "drmat/trace.hpp"

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

Weight random_weight(const LieAlgebra& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Weight w(g.rank);
    for (int i = 0; i < g.rank; ++i) w[i] = cplx(2.0 + u(rng), 0.7 * u(rng));
    return w;
}

// independent Kostant partition count: DP over the positive roots
long long kostant(const LieAlgebra& g, const Lattice& beta) {
    std::map<Lattice, long long> dp{{Lattice(g.rank, 0), 1}};
    for (int a = 0; a < g.num_pos; ++a) {
        std::map<Lattice, long long> next;
        for (auto& [b, c] : dp) {
            Lattice cur = b;
            for (;;) {
                bool ok = true;
                for (int k = 0; k < g.rank; ++k)
                    if (cur[k] > beta[k]) ok = false;
                if (!ok) break;
                next[cur] += c;
                cur = lattice_add(cur, Lattice(g.roots.positive[a].begin(),
                                               g.roots.positive[a].end()));
            }
        }
        dp = std::move(next);
    }
    auto it = dp.find(beta);
    return it == dp.end() ? 0 : it->second;
}

std::vector<cplx> basis_vector(int dim, int idx) {
    std::vector<cplx> v(dim, 0.0);
    v[idx] = 1.0;
    return v;
}

} // namespace

TEST_CASE("Verma skeleton dimensions match Kostant counts") {
    LieAlgebra a1 = build_simple_lie_algebra("A1");
    VermaSkeleton sk1 = build_verma_skeleton(a1, 3, default_pbw(a1));
    for (int k = 0; k <= 3; ++k) CHECK(sk1.block_dim(Lattice{k}) == 1);

    LieAlgebra a2 = build_simple_lie_algebra("A2");
    VermaSkeleton sk2 = build_verma_skeleton(a2, 4, default_pbw(a2));
    CHECK(sk2.block_dim(Lattice{1, 1}) == 2);
    for (const Lattice& beta : sk2.block_keys)
        CHECK(sk2.block_dim(beta) == kostant(a2, beta));

    LieAlgebra b2 = build_simple_lie_algebra("B2");
    VermaSkeleton skb = build_verma_skeleton(b2, 4, default_pbw(b2));
    for (const Lattice& beta : skb.block_keys)
        CHECK(skb.block_dim(beta) == kostant(b2, beta));

    CHECK_THROWS_AS(build_verma_skeleton(a1, 9, default_pbw(a1)), CapExceeded);
}

TEST_CASE("defining relations on the truncated module") {
    LieAlgebra g = build_simple_lie_algebra("A2");
    std::mt19937_64 rng(17);
    Weight mu = random_weight(g, rng);
    VermaSkeleton sk = build_verma_skeleton(g, 3, default_pbw(g));
    // e_i f_i v = <mu, h_i> v
    for (int i = 0; i < g.rank; ++i) {
        RootVec ai(g.rank, 0);
        ai[i] = 1;
        int ri = g.roots.index_of_root.at(ai);
        UElem v{{Monomial{}, 1.0}};
        UElem fv = act_f(g, sk.order, ri, v, sk.cap);
        UElem efv = act_e_simple(g, sk.order, i, mu, fv, sk.cap);
        cplx expect = 0;
        for (int j = 0; j < g.rank; ++j)
            expect += mu[j] * static_cast<double>(g.cartan.a[i][j]);
        REQUIRE(efv.size() == 1);
        // f_i is d_i * Chevalley f; with [E,F] = alpha^sharp the scalar is
        // <mu, alpha_i^sharp> = (mu, alpha_i)
        cplx got = efv.at(Monomial{});
        cplx expect_sharp = weight_pairing(g, mu, [&] {
            Weight a(g.rank, 0.0);
            a[i] = 1.0;
            return a;
        }());
        CHECK(std::abs(got - expect_sharp) < 1e-13);
        (void)expect;
    }
}

TEST_CASE("Casimir acts by (mu, mu + 2 rho) on every block") {
    std::mt19937_64 rng(23);
    for (const char* label : {"A1", "A2", "B2"}) {
        LieAlgebra g = build_simple_lie_algebra(label);
        INFO(label);
        Weight mu = random_weight(g, rng);
        int cap = 3;
        VermaSkeleton sk = build_verma_skeleton(g, cap, default_pbw(g));
        cplx expect = casimir_scalar(g, mu);
        for (const Lattice& beta : sk.block_keys) {
            for (const Monomial& m : sk.block(beta)) {
                UElem v{{m, 1.0}};
                UElem cv = act_casimir(g, sk.order, mu, v, cap);
                // compare with expect * v
                cv[m] -= expect;
                double nrm = 0;
                for (auto& [mm, c] : cv) nrm += std::norm(c);
                REQUIRE(std::sqrt(nrm) < 1e-10);
            }
        }
    }
}

TEST_CASE("intertwiner: sl(2) adjoint degree-1 coefficient") {
    LieAlgebra g = build_simple_lie_algebra("A1");
    FiniteModule V = adjoint_module(g);
    VermaSkeleton sk = build_verma_skeleton(g, 3, default_pbw(g));
    Weight mu{cplx(1.37, 0.41)};
    Intertwiner phi = build_intertwiner(sk, V, basis_vector(V.dim, g.h_index(0)), mu);
    // degree-1 block: coefficient of f v (x) e equals 2 / <mu, h>
    cplx pairing = 2.0 * mu[0]; // <mu, h_1> = a_11 mu_1
    Eigen::MatrixXcd u1 = phi.singular.at(Lattice{1});
    CHECK(std::abs(u1(0, g.e_index(0)) - 2.0 / pairing) < 1e-12);
    CHECK(intertwiner_defect(phi) < 1e-10);

    // trivial module: the singular vector is v_mu (x) 1 only
    FiniteModule T = trivial_module(g);
    Intertwiner tphi = build_intertwiner(sk, T, {1.0}, mu);
    for (auto& [beta, U] : tphi.singular)
        if (lattice_height(beta) > 0) CHECK(U.norm() < 1e-14);

    // Kac-Kazhdan locus: <mu, h> = 0 at degree 1
    CHECK_THROWS_AS(
        build_intertwiner(sk, V, basis_vector(V.dim, g.h_index(0)), Weight{cplx(0.0)}),
        ShapovalovSingular);
}

TEST_CASE("intertwiner defect vanishes on A2") {
    LieAlgebra g = build_simple_lie_algebra("A2");
    FiniteModule V = adjoint_module(g);
    VermaSkeleton sk = build_verma_skeleton(g, 3, default_pbw(g));
    std::mt19937_64 rng(31);
    Weight mu = random_weight(g, rng);
    Intertwiner phi = build_intertwiner(sk, V, basis_vector(V.dim, g.h_index(0)), mu);
    CHECK(intertwiner_defect(phi) < 1e-9);
}

TEST_CASE("twist operator on Verma modules") {
    LieAlgebra g = build_simple_lie_algebra("A2");
    VermaSkeleton sk = build_verma_skeleton(g, 3, default_pbw(g));
    int i1 = g.roots.index_of_root.at(RootVec{1, 0});
    int i2 = g.roots.index_of_root.at(RootVec{0, 1});
    int i12 = g.roots.index_of_root.at(RootVec{1, 1});

    // T = id: identity on monomials
    TripleAnalysis idt = analyze_triple(g, identity_triple(g));
    for (const Lattice& beta : sk.block_keys)
        for (const Monomial& m : sk.block(beta)) {
            UElem im = twist_monomial(idt, sk, m);
            REQUIRE(im.size() == 1);
            CHECK(std::abs(im.at(m) - 1.0) < 1e-14);
        }

    // A2 swap
    TripleAnalysis sw = analyze_triple(g, swap_a2());
    {
        UElem im = twist_monomial(sw, sk, Monomial{i1});
        REQUIRE(im.size() == 1);
        CHECK(std::abs(im.at(Monomial{i2}) - 1.0) < 1e-14);
        UElem im12 = twist_monomial(sw, sk, Monomial{i12});
        REQUIRE(im12.size() == 1);
        CHECK(std::abs(im12.at(Monomial{i12}) + 1.0) < 1e-14);
    }

    // nilpotent chain kills f_{alpha_2}
    TripleSpec chain;
    chain.gamma1 = {0};
    chain.gamma2 = {1};
    chain.t_map = {{0, 1}};
    TripleAnalysis ch = analyze_triple(g, chain);
    CHECK(twist_monomial(ch, sk, Monomial{i2}).empty());

    // Lemma-style exchange relations on the swap triple:
    // B x = B(x) B for x = f_gamma, gamma in <Gamma1>; x B = B B^{-1}(x) for e's
    std::mt19937_64 rng(41);
    Weight xi(g.rank);
    {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        // xi in l*: proportional to rho
        cplx s = cplx(1.9 + 0.3 * u(rng), 0.4 * u(rng));
        for (int i = 0; i < g.rank; ++i) xi[i] = s * to_double(g.rho[i]);
    }
    Weight nu(g.rank, 0.0);
    WeightConstraintSolution sol = solve_weight_constraint(sw, nu, xi);
    Weight mu = sol.mu, mu_prime = weight_add(sol.mu, nu, -1.0);
    for (int a : {i1, i2, i12}) {
        for (const Lattice& beta : sk.block_keys) {
            if (lattice_height(beta) + g.roots.heights[a] > sk.cap) continue;
            for (const Monomial& m : sk.block(beta)) {
                UElem v{{m, 1.0}};
                UElem lhs = twist_apply(sw, sk, act_f(g, sk.order, a, v, sk.cap));
                // B(f_a) f-image
                auto img = sw.b_f_image.at(a);
                UElem rhs = act_f(g, sk.order, img.first, twist_apply(sw, sk, v), sk.cap);
                for (auto& [mm, c] : rhs) {
                    lhs[mm] -= to_double(img.second) * c;
                }
                double nrm = 0;
                for (auto& [mm, c] : lhs) nrm += std::norm(c);
                REQUIRE(std::sqrt(nrm) < 1e-12);
            }
        }
    }
    // e-side: e_a|M_mu B = B B^{-1}(e_a)|M_mu'
    for (int a : {i1, i2, i12}) {
        auto inv = sw.binv_e_image.at(a);
        for (const Lattice& beta : sk.block_keys) {
            for (const Monomial& m : sk.block(beta)) {
                UElem v{{m, 1.0}};
                UElem lhs = act_e(g, sk.order, a, mu, twist_apply(sw, sk, v), sk.cap);
                UElem rhs = twist_apply(
                    sw, sk,
                    act_e(g, sk.order, inv.first, mu_prime, v, sk.cap));
                for (auto& [mm, c] : rhs) lhs[mm] -= to_double(inv.second) * c;
                double nrm = 0;
                for (auto& [mm, c] : lhs) nrm += std::norm(c);
                REQUIRE(std::sqrt(nrm) < 1e-11);
            }
        }
    }
}

TEST_CASE("weight constraint solutions") {
    LieAlgebra a2 = build_simple_lie_algebra("A2");
    TripleAnalysis sw = analyze_triple(a2, swap_a2());
    // nu proportional to alpha1 - alpha2 lies in l-perp
    Weight nu{cplx(0.83, 0.21), cplx(-0.83, -0.21)};
    Weight xi(a2.rank);
    for (int i = 0; i < a2.rank; ++i) xi[i] = cplx(1.1, 0.2) * to_double(a2.rho[i]);
    WeightConstraintSolution sol = solve_weight_constraint(sw, nu, xi);
    CHECK(sol.residual < 1e-13);
    // not perpendicular: nu = alpha1
    CHECK_THROWS_AS(solve_weight_constraint(sw, Weight{1.0, 0.0}, xi), NuNotPerp);

    // T = id forces nu = 0
    TripleAnalysis idt = analyze_triple(a2, identity_triple(a2));
    CHECK_THROWS_AS(solve_weight_constraint(idt, Weight{1.0, -1.0}, xi), NuNotPerp);
    WeightConstraintSolution sid = solve_weight_constraint(idt, Weight{0.0, 0.0}, xi);
    for (int i = 0; i < a2.rank; ++i) CHECK(std::abs(sid.mu[i] - xi[i]) < 1e-14);

    // A3 chain: random nu in h0*
    LieAlgebra a3 = build_simple_lie_algebra("A3");
    TripleAnalysis ch = analyze_triple(a3, chain_a3());
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Weight nu3(a3.rank, 0.0);
    for (int r = 0; r < ch.dim_h0(); ++r) {
        cplx c(u(rng), 0.3 * u(rng));
        // flat of h0 basis row: coords / d_i
        for (int i = 0; i < a3.rank; ++i)
            nu3[i] += c * to_double(ch.h0_basis[r][i] / a3.cartan.d[i]);
    }
    Weight xi3(a3.rank, 0.0);
    for (int i = 0; i < a3.rank; ++i)
        for (const RatVec& l : ch.l_basis)
            xi3[i] += cplx(1.2, 0.1) * to_double(l[i] / a3.cartan.d[i]);
    WeightConstraintSolution s3 = solve_weight_constraint(ch, nu3, xi3);
    CHECK(s3.residual < 1e-12);
}

TEST_CASE("delta_B product, value, and reciprocity") {
    LieAlgebra a1 = build_simple_lie_algebra("A1");
    TripleAnalysis id1 = analyze_triple(a1, identity_triple(a1));
    ScalarSeries p = delta_b_product(id1, 6);
    REQUIRE(p.series.terms.size() == 2);
    CHECK(std::abs(p.series.terms.at(Lattice{0}) - 1.0) < 1e-15);
    CHECK(std::abs(p.series.terms.at(Lattice{1}) + 1.0) < 1e-15);

    // A2 swap at e^{-(alpha_1,lambda)} = 1/2: delta_B = 4 * 15/16 = 15/4
    LieAlgebra a2 = build_simple_lie_algebra("A2");
    TripleAnalysis sw = analyze_triple(a2, swap_a2());
    LambdaPoint lam = lambda_from_pairings({std::log(2.0), std::log(2.0)});
    ScalarSeries p2 = delta_b_product(sw, 6);
    CHECK(std::abs(scalar_series_eval(a2, p2, lam) - 15.0 / 4.0) < 1e-13);

    // reciprocity through height 6
    for (auto& [h, v] : delta_b_reciprocity(id1, 6)) {
        INFO("A1 height " << h);
        CHECK(v < 1e-12);
    }
    for (auto& [h, v] : delta_b_reciprocity(sw, 6)) {
        INFO("A2 swap height " << h);
        CHECK(v < 1e-12);
    }
    LieAlgebra a3 = build_simple_lie_algebra("A3");
    TripleAnalysis ch = analyze_triple(a3, chain_a3());
    for (auto& [h, v] : delta_b_reciprocity(ch, 6)) {
        INFO("A3 chain height " << h);
        CHECK(v < 1e-12);
    }
}

TEST_CASE("r = 0 trace is the delta_B reciprocal") {
    LieAlgebra g = build_simple_lie_algebra("A2");
    TripleAnalysis sw = analyze_triple(g, swap_a2());
    TraceJob job;
    job.an = &sw;
    job.mu = Weight(g.rank, 0.0);
    for (int i = 0; i < g.rank; ++i) job.mu[i] = -to_double(g.rho[i]);
    job.height = 5;
    job.order = default_pbw(g);
    TraceSeries f = trace_function(job);
    ScalarSeries t = delta_b_trace(sw, 5);
    for (auto& [beta, c] : f.coeffs) {
        auto it = t.series.terms.find(beta);
        cplx expect = (it == t.series.terms.end()) ? cplx(0) : it->second;
        REQUIRE(std::abs(c[0] - expect) < 1e-12);
    }
}

TEST_CASE("dual-path trace oracle: two PBW orders agree") {
    LieAlgebra g = build_simple_lie_algebra("A1");
    TripleAnalysis id1 = analyze_triple(g, identity_triple(g));
    FiniteModule V = adjoint_module(g);
    TraceJob job;
    job.an = &id1;
    job.modules = {&V};
    job.vectors = {basis_vector(V.dim, g.h_index(0))};
    job.mu = Weight{cplx(1.21, 0.33)};
    job.height = 3;
    job.order = default_pbw(g);
    TraceSeries f1 = trace_function(job);
    job.order = reversed_pbw(g);
    TraceSeries f2 = trace_function(job);
    for (auto& [beta, c] : f1.coeffs) {
        REQUIRE(f2.coeffs.count(beta) == 1);
        const auto& c2 = f2.coeffs.at(beta);
        for (std::size_t t = 0; t < c.size(); ++t) REQUIRE(std::abs(c[t] - c2[t]) < 1e-12);
    }

    // also on A2 with the swap triple
    LieAlgebra a2 = build_simple_lie_algebra("A2");
    TripleAnalysis sw = analyze_triple(a2, swap_a2());
    FiniteModule V2 = adjoint_module(a2);
    TraceJob j2;
    j2.an = &sw;
    j2.modules = {&V2};
    j2.vectors = {basis_vector(V2.dim, a2.h_index(0))};
    Weight xi(a2.rank);
    for (int i = 0; i < a2.rank; ++i) xi[i] = cplx(1.17, 0.29) * to_double(a2.rho[i]);
    j2.mu = solve_weight_constraint(sw, Weight(a2.rank, 0.0), xi).mu;
    j2.height = 3;
    j2.order = default_pbw(a2);
    TraceSeries g1 = trace_function(j2);
    j2.order = reversed_pbw(a2);
    TraceSeries g2 = trace_function(j2);
    for (auto& [beta, c] : g1.coeffs) {
        const auto& c2 = g2.coeffs.at(beta);
        for (std::size_t t = 0; t < c.size(); ++t) REQUIRE(std::abs(c[t] - c2[t]) < 1e-11);
    }
    // l-weight of every coefficient is zero
    for (auto& [beta, c] : g1.coeffs)
        for (int j = 0; j < V2.dim; ++j)
            if (std::abs(c[j]) > 1e-12) {
                std::vector<cplx> sh = weight_sharp(a2, V2.weights[j]);
                for (int i = 0; i < a2.rank; ++i) {
                    cplx p = 0;
                    for (int k = 0; k < a2.rank; ++k)
                        p += to_double(sw.proj_l[i][k]) * sh[k];
                    REQUIRE(std::abs(p) < 1e-12);
                }
            }
}
