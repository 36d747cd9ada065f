#include <catch_amalgamated.hpp>

#include <cableimp/greens.hpp>
#include <cableimp/greens_quadrature.hpp>

#include "oracle_values.hpp"

using namespace cableimp;

namespace {

constexpr double inv2pi = 1.0 / (2.0 * pi);

ConductorSpec tube(double x, double y, double a, double ai, int order) {
    ConductorSpec c;
    c.x = x;
    c.y = y;
    c.outer_radius = a;
    c.inner_radius = ai;
    c.sigma = 58e6;
    c.order = order;
    return c;
}

ReferencePolicy explicit_ref() {
    ReferencePolicy r;
    r.mode = ReferencePolicy::Mode::Explicit;
    r.index = 0;
    return r;
}

// Shells at non-collinear positions so that entries are genuinely complex.
CableSystem scattered(double shift_x = 0.0, double shift_y = 0.0, double s = 1.0) {
    std::vector<ConductorSpec> cs = {tube(s * (-0.045 + shift_x), s * (0.01 + shift_y), s * 0.020, s * 0.016, 3),
                                     tube(s * (0.0 + shift_x), s * (-0.02 + shift_y), s * 0.020, s * 0.016, 3),
                                     tube(s * (0.05 + shift_x), s * (0.03 + shift_y), s * 0.020, s * 0.016, 3)};
    ConductorSpec core;
    core.x = s * (0.0 + shift_x);
    core.y = s * (-0.02 + shift_y);
    core.outer_radius = s * 0.01;
    core.sigma = 58e6;
    core.order = 2;
    cs.push_back(core);  // inside the cavity of shell 1
    return make_system(cs, explicit_ref());
}

}  // namespace

TEST_CASE("Self terms", "[greens]") {
    const Contour c{{0.3, -0.2}, 0.025};
    CHECK(greens_entry(c, c, 0, 0).real() == Catch::Approx(inv2pi * std::log(0.025)).epsilon(1e-15));
    for (int n : {1, -1, 3, -7})
        CHECK(greens_entry(c, c, n, n).real() == Catch::Approx(-1.0 / (4.0 * pi * std::abs(n))).epsilon(1e-15));
    CHECK(greens_entry(c, c, 1, 2) == cplx(0.0));
    const auto q0 = greens_entry_quadrature(c, c, 0, 0);
    CHECK(std::abs(q0.value - inv2pi * std::log(0.025)) < 1e-12);
    const auto q3 = greens_entry_quadrature(c, c, 3, 3);
    CHECK(std::abs(q3.value + 1.0 / (12.0 * pi)) < 1e-12);
}

TEST_CASE("Well-separated rings act as line sources", "[greens]") {
    const Contour p{{0.0, 0.0}, 0.02}, q{{0.3, 0.4}, 0.01};
    CHECK(greens_entry(p, q, 0, 0).real() == Catch::Approx(inv2pi * std::log(0.5)).epsilon(1e-15));
    const auto r = greens_entry_quadrature(p, q, 0, 0);
    CHECK(std::abs(r.value - inv2pi * std::log(0.5)) < 1e-11);
}

TEST_CASE("Closed forms against an mpmath double integral", "[greens]") {
    const Contour p{{0.0, 0.0}, 0.025}, q{{0.05, 0.03}, 0.02};
    CHECK(std::abs(greens_entry(p, q, 1, -2) - oracle::g_pair_m1_nm2) < 1e-12 * std::abs(oracle::g_pair_m1_nm2));
    CHECK(std::abs(greens_entry(p, q, 0, 0) - oracle::g_pair_m0_n0) < 1e-12 * std::abs(oracle::g_pair_m0_n0));
    CHECK(std::abs(greens_entry(p, q, -2, 1) - oracle::g_pair_mm2_n1) < 1e-12 * std::abs(oracle::g_pair_mm2_n1));
    const Contour outer{{0.0, 0.0}, 0.05}, inner{{0.01, -0.012}, 0.02};
    CHECK(std::abs(greens_entry(outer, inner, -2, -1) - oracle::g_encl_mm2_nm1) <
          1e-12 * std::abs(oracle::g_encl_mm2_nm1));
}

TEST_CASE("Single conductors", "[greens]") {
    ConductorSpec s;
    s.outer_radius = 0.025;
    s.sigma = 58e5;
    const auto sys1 = make_system({s}, explicit_ref());
    const auto G1 = assemble_G(sys1, make_layout(sys1));
    REQUIRE(G1.rows() == 1);
    CHECK(G1(0, 0).real() == Catch::Approx(inv2pi * std::log(0.025)).epsilon(1e-15));

    const auto sys2 = make_system({tube(0, 0, 0.02, 0.016, 0)}, explicit_ref());
    const auto G2 = assemble_G(sys2, make_layout(sys2));
    REQUIRE(G2.rows() == 2);
    CHECK(G2(0, 1).real() == Catch::Approx(inv2pi * std::log(0.02)).epsilon(1e-15));
    CHECK(G2(1, 0).real() == Catch::Approx(inv2pi * std::log(0.02)).epsilon(1e-15));
    CHECK(G2(0, 0).real() == Catch::Approx(inv2pi * std::log(0.016)).epsilon(1e-15));
    const auto q = greens_entry_quadrature({0.0, 0.016}, {0.0, 0.02}, 0, 0);
    CHECK(std::abs(q.value - inv2pi * std::log(0.02)) < 1e-12);
}

TEST_CASE("Reciprocity and conjugation symmetry", "[greens]") {
    const auto sys = scattered();
    const auto L = make_layout(sys);
    const auto G = assemble_G(sys, L);
    for (int i = 0; i < L.size(); ++i)
        for (int j = 0; j < L.size(); ++j) {
            const auto& ri = L.rows[i];
            const auto& rj = L.rows[j];
            // G^{pq}_{mn} = G^{qp}_{-n,-m}
            const int a = L.index(rj.conductor, rj.inner, -rj.n);
            const int b = L.index(ri.conductor, ri.inner, -ri.n);
            CHECK(std::abs(G(i, j) - G(a, b)) < 1e-12);
            // G^{pq}_{-m,-n} = conj(G^{pq}_{mn})
            CHECK(std::abs(G(b, a) - std::conj(G(i, j))) < 1e-12);
        }
}

TEST_CASE("Collinear centres give real entries", "[greens]") {
    const auto sys = make_system({tube(-0.045, 0, 0.02, 0.016, 4), tube(0, 0, 0.02, 0.016, 4),
                                  tube(0.045, 0, 0.02, 0.016, 4)},
                                 explicit_ref());
    const auto G = assemble_G(sys, make_layout(sys));
    CHECK(G.rows() == 54);
    CHECK(G.imag().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Translation invariance", "[greens]") {
    const auto A = assemble_G(scattered(), make_layout(scattered()));
    const auto B = assemble_G(scattered(0.7, -1.3), make_layout(scattered(0.7, -1.3)));
    CHECK((A - B).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Scaling law", "[greens]") {
    const double s = 3.5;
    const auto L = make_layout(scattered());
    const auto A = assemble_G(scattered(), L);
    const auto B = assemble_G(scattered(0, 0, s), make_layout(scattered(0, 0, s)));
    for (int i = 0; i < L.size(); ++i)
        for (int j = 0; j < L.size(); ++j) {
            const bool zero_zero = L.rows[i].n == 0 && L.rows[j].n == 0;
            const cplx expect = A(i, j) + (zero_zero ? inv2pi * std::log(s) : 0.0);
            CHECK(std::abs(B(i, j) - expect) < 1e-12);
        }
}

TEST_CASE("Closed forms against Boost quadrature", "[greens]") {
    // disjoint, enclosed (both orientations) and concentric samples
    const Contour a{{-0.045, 0.01}, 0.02}, b{{0.0, -0.02}, 0.016}, c{{0.0, -0.02}, 0.01}, d{{0.05, 0.03}, 0.02};
    const Contour e{{0.005, -0.017}, 0.008};
    const std::pair<Contour, Contour> pairs[] = {{a, d}, {d, a}, {b, c}, {c, b}, {a, b}, {b, e}, {e, b}};
    for (const auto& [p, q] : pairs)
        for (int m : {-2, 0, 1})
            for (int n : {-1, 0, 2}) {
                const cplx g = greens_entry(p, q, m, n);
                const auto r = greens_entry_quadrature(p, q, m, n);
                const double scale = std::max(std::abs(g), 1e-3 * std::abs(greens_entry(p, q, 0, 0)));
                INFO("m = " << m << ", n = " << n);
                CHECK(std::abs(g - r.value) < 1e-9 * scale);
                CHECK(r.error < 1e-9 * scale);
            }
}

TEST_CASE("Overlapping contours rejected", "[greens]") {
    CHECK_THROWS_AS(greens_entry({{0.0, 0.0}, 0.02}, {{0.03, 0.0}, 0.02}, 0, 0), GeometryError);
}
