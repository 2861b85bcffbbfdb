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

std::vector<cplx> basis_vector(int dim, int idx) {
    std::vector<cplx> v(dim, 0.0);
    v[idx] = 1.0;
    return v;
}

Weight xi_in_lstar(const TripleAnalysis& an, cplx scale) {
    const LieAlgebra& g = *an.alg;
    // generic multiple of rho (rho lies in l for every triple)
    Weight xi(g.rank);
    for (int i = 0; i < g.rank; ++i) xi[i] = scale * to_double(g.rho[i]);
    return xi;
}

} // namespace

TEST_CASE("KZB: A1, T=id, r=1 and r=2 with adjoint modules") {
    LieAlgebra g = build_simple_lie_algebra("A1");
    TripleAnalysis an = analyze_triple(g, identity_triple(g));
    FiniteModule V = adjoint_module(g);

    TraceJob job;
    job.an = &an;
    job.modules = {&V};
    job.vectors = {basis_vector(V.dim, g.h_index(0))};
    job.mu = solve_weight_constraint(an, Weight{0.0}, Weight{cplx(1.29, 0.37)}).mu;
    job.height = 3;
    job.order = default_pbw(g);
    KzbReport rep1 = kzb_check(job);
    for (auto& [h, v] : rep1.per_order) {
        INFO("r=1 order " << h);
        CHECK(v < 1e-9);
    }

    job.modules = {&V, &V};
    job.vectors = {basis_vector(V.dim, g.h_index(0)), basis_vector(V.dim, g.h_index(0))};
    KzbReport rep2 = kzb_check(job);
    for (auto& [h, v] : rep2.per_order) {
        INFO("r=2 order " << h);
        CHECK(v < 1e-9);
    }
}

TEST_CASE("KZB: A2 swap, r=1 with the sl(3) adjoint") {
    LieAlgebra g = build_simple_lie_algebra("A2");
    TripleAnalysis an = analyze_triple(g, swap_a2());
    FiniteModule V = adjoint_module(g);
    TraceJob job;
    job.an = &an;
    job.modules = {&V};
    job.vectors = {basis_vector(V.dim, g.h_index(0))}; // zero-weight vector
    job.mu = solve_weight_constraint(an, Weight(g.rank, 0.0), xi_in_lstar(an, cplx(1.31, 0.21))).mu;
    job.height = 3;
    job.order = default_pbw(g);
    KzbReport rep = kzb_check(job);
    for (auto& [h, v] : rep.per_order) {
        INFO("order " << h);
        CHECK(v < 1e-9);
    }
}

TEST_CASE("KZB negative control: perturbed r-matrix") {
    LieAlgebra g = build_simple_lie_algebra("A1");
    TripleAnalysis an = analyze_triple(g, identity_triple(g));
    FiniteModule V = adjoint_module(g);
    TraceJob job;
    job.an = &an;
    job.modules = {&V, &V};
    job.vectors = {basis_vector(V.dim, g.h_index(0)), basis_vector(V.dim, g.h_index(0))};
    job.mu = solve_weight_constraint(an, Weight{0.0}, Weight{cplx(1.29, 0.37)}).mu;
    job.height = 3;
    job.order = default_pbw(g);
    job.r_options.perturb_first_ef = 0.01;
    KzbReport rep = kzb_check(job);
    CHECK(rep.max_residual > 1e-4);
}

TEST_CASE("second order: A1 and A2 swap, r=1") {
    {
        LieAlgebra g = build_simple_lie_algebra("A1");
        TripleAnalysis an = analyze_triple(g, identity_triple(g));
        FiniteModule V = adjoint_module(g);
        TraceJob job;
        job.an = &an;
        job.modules = {&V};
        job.vectors = {basis_vector(V.dim, g.h_index(0))};
        job.mu = solve_weight_constraint(an, Weight{0.0}, Weight{cplx(1.43, 0.29)}).mu;
        job.height = 3;
        job.order = default_pbw(g);
        KzbReport rep = second_order_check(job);
        for (auto& [h, v] : rep.per_order) {
            INFO("A1 order " << h);
            CHECK(v < 1e-9);
        }
    }
    {
        LieAlgebra g = build_simple_lie_algebra("A2");
        TripleAnalysis an = analyze_triple(g, swap_a2());
        FiniteModule V = adjoint_module(g);
        TraceJob job;
        job.an = &an;
        job.modules = {&V};
        job.vectors = {basis_vector(V.dim, g.h_index(0))};
        job.mu = solve_weight_constraint(an, Weight(g.rank, 0.0),
                                         xi_in_lstar(an, cplx(1.27, 0.31))).mu;
        job.height = 3;
        job.order = default_pbw(g);
        KzbReport rep = second_order_check(job);
        for (auto& [h, v] : rep.per_order) {
            INFO("A2 swap order " << h);
            CHECK(v < 1e-9);
        }
    }
}

TEST_CASE("second order, r=0: constants are eigenfunctions") {
    LieAlgebra g = build_simple_lie_algebra("A2");
    TripleAnalysis an = analyze_triple(g, swap_a2());
    TraceJob job;
    job.an = &an;
    job.mu = solve_weight_constraint(an, Weight(g.rank, 0.0),
                                     xi_in_lstar(an, cplx(0.93, 0.17))).mu;
    job.height = 4;
    job.order = default_pbw(g);
    KzbReport rep = second_order_check(job);
    for (auto& [h, v] : rep.per_order) {
        INFO("order " << h);
        CHECK(v < 1e-10);
    }
}

TEST_CASE("Weyl denominator identity") {
    LieAlgebra a1 = build_simple_lie_algebra("A1");
    TripleAnalysis id1 = analyze_triple(a1, identity_triple(a1));
    for (auto& [h, v] : weyl_denominator_identity(id1, 5)) {
        INFO("A1 order " << h);
        CHECK(v < 1e-10);
    }
    LieAlgebra a2 = build_simple_lie_algebra("A2");
    TripleAnalysis sw = analyze_triple(a2, swap_a2());
    for (auto& [h, v] : weyl_denominator_identity(sw, 5)) {
        INFO("A2 swap order " << h);
        CHECK(v < 1e-10);
    }
    LieAlgebra a3 = build_simple_lie_algebra("A3");
    TripleSpec chain;
    chain.gamma1 = {0, 1};
    chain.gamma2 = {1, 2};
    chain.t_map = {{0, 1}, {1, 2}};
    TripleAnalysis ch = analyze_triple(a3, chain);
    for (auto& [h, v] : weyl_denominator_identity(ch, 4)) {
        INFO("A3 chain order " << h);
        CHECK(v < 1e-10);
    }
}

TEST_CASE("KZB operators commute (A1, T=id, r=2)") {
    LieAlgebra g = build_simple_lie_algebra("A1");
    TripleAnalysis an = analyze_triple(g, identity_triple(g));
    FiniteModule V = adjoint_module(g);
    int H = 3;
    LatticeSeries<Tensor2> r_series = expand_r_series(an, H);
    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // zero-weight pairs of the adjoint tensor square
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < V.dim; ++a)
        for (int b = 0; b < V.dim; ++b) {
            double ht = (V.weights[a][0] + V.weights[b][0]).real();
            if (std::abs(ht) < 1e-12) pairs.emplace_back(a, b);
        }
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        TraceSeries s;
        s.prefactor = Weight{cplx(1.19, 0.23)}; // xi + rho bookkeeping
        s.modules = {&V, &V};
        s.height_cap = H;
        for (int h = 0; h <= H; ++h) {
            std::vector<cplx> c(V.dim * V.dim, 0.0);
            for (auto& [a, b] : pairs) c[a * V.dim + b] = cplx(u(rng), u(rng));
            s.coeffs[Lattice{h}] = c;
        }
        TraceSeries k12 = apply_kzb_operator(an, apply_kzb_operator(an, s, 1, r_series), 0,
                                             r_series);
        TraceSeries k21 = apply_kzb_operator(an, apply_kzb_operator(an, s, 0, r_series), 1,
                                             r_series);
        for (auto& [beta, c] : k21.coeffs) {
            auto [it, fresh] =
                k12.coeffs.try_emplace(beta, std::vector<cplx>(c.size(), 0.0));
            (void)fresh;
            for (std::size_t t = 0; t < c.size(); ++t) it->second[t] -= c[t];
        }
        for (auto& [h, v] : series_residual_norms(an, k12)) worst = std::max(worst, v);
    }
    CHECK(worst < 1e-9);
}
