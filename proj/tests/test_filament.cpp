#include <catch_amalgamated.hpp>

#include <cableimp/filament.hpp>
#include <cableimp/solver.hpp>

#include <numeric>

using namespace cableimp;

namespace {

ConductorSpec solid(double x, double a, double sigma, int order = 0) {
    ConductorSpec c;
    c.x = x;
    c.outer_radius = a;
    c.sigma = sigma;
    c.order = order;
    return c;
}

ConductorSpec tube(double x, double ao, double ai, double sigma, int order = 0) {
    ConductorSpec c = solid(x, ao, sigma, order);
    c.inner_radius = ai;
    return c;
}

cplx loop(const MatrixXcd& z) { return z(0, 0) + z(1, 1) - z(0, 1) - z(1, 0); }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

void check_mesh(const CableSystem& sys, const FilamentMesh& mesh, double f) {
    REQUIRE(mesh.parts.size() == sys.user_count());
    for (const auto& part : mesh.parts) {
        const auto& c = sys.conductors[part.conductor];
        const double area = std::accumulate(part.filaments.begin(), part.filaments.end(), 0.0,
                                            [](double s, const Filament& x) { return s + x.area; });
        CHECK(std::abs(area - part.area_exact) < 5e-3 * part.area_exact);
        const double dmax = max_filament_diameter(c, f);
        for (const auto& x : part.filaments) {
            CHECK(2.0 * x.r_eq <= dmax * (1.0 + 1e-12));
            CHECK(std::abs(std::complex<double>(x.x, x.y) - c.center()) <= c.outer_radius);
        }
    }
}

}  // namespace

TEST_CASE("Mesh invariants", "[filament]") {
    // solid 25 mm, 5.8 MS/m at 50 Hz (skin depth 29.6 mm: limited by a/6)
    const auto s = make_system({solid(0, 0.025, 58e5)});
    CHECK(skin_depth(50.0, mu0, 58e5) == Catch::Approx(0.0296).epsilon(1e-2));
    CHECK(max_filament_diameter(s.conductors[0], 50.0) == Catch::Approx(0.025 / 6.0));
    check_mesh(s, build_mesh(s, 50.0), 50.0);

    // copper tube 20/16 mm at 10 kHz: at least two rings per skin depth
    const auto t = make_system({tube(0, 0.020, 0.016, 58e6)});
    const auto m = build_mesh(t, 1e4);
    check_mesh(t, m, 1e4);
    const auto& part = m.parts[0];
    REQUIRE(part.circulant);
    CHECK(part.rings * part.sectors == int(part.filaments.size()));
    const double h = 0.004 / part.rings;
    CHECK(skin_depth(1e4, mu0, 58e6) / h >= 2.0);
}

TEST_CASE("Low frequency floor still gives a valid mesh", "[filament]") {
    // thin sheath: one ring, sectors set by the a/6 bound
    const auto t = make_system({tube(0, 0.03797, 0.03775, 1 / 1.718e-8)});
    const auto m = build_mesh(t, 1e-3);
    CHECK(m.parts[0].rings == 1);
    check_mesh(t, m, 1e-3);
    const auto s = make_system({solid(0, 0.01, 58e6)});
    check_mesh(s, build_mesh(s, 1e-3), 1e-3);
}

TEST_CASE("Mesh errors", "[filament]") {
    const auto t = make_system({tube(0, 0.020, 0.016, 58e6)});
    MeshOptions opt;
    opt.max_filaments = 100;
    MeshOptions roomy;
    roomy.max_filaments = 10000000;
    const std::size_t needed = build_mesh(t, 1e5, roomy).count();
    try {
        build_mesh(t, 1e5, opt);
        FAIL("budget not enforced");
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("filaments") != std::string::npos);
        CHECK(msg.find(std::to_string(needed)) != std::string::npos);
    }
    auto mag = t;
    mag.conductors[0].mu_r = 100.0;
    CHECK_THROWS_AS(build_mesh(mag, 50.0), GeometryError);
    CHECK_THROWS_AS(build_mesh(t, 0.0), NumericalError);
    opt = {};
    opt.refine = 0.5;
    CHECK_THROWS_AS(build_mesh(t, 50.0, opt), GeometryError);
}

TEST_CASE("DC resistance of a solid conductor", "[filament]") {
    const double a = 0.025, sigma = 58e5;
    const auto s = make_system({solid(0, a, sigma)});
    const auto z = filament_impedance(build_mesh(s, 50.0), 1e-2);
    REQUIRE(z.rows() == 1);
    CHECK(std::abs(z(0, 0).real() * sigma * pi * a * a - 1.0) < 1e-3);
}

TEST_CASE("Two-wire loop against MoM at 50 Hz", "[filament]") {
    const auto sys = make_system({solid(-0.035, 0.025, 58e5, 4), solid(0.035, 0.025, 58e5, 4)});
    const auto zf = filament_impedance(build_mesh(sys, 50.0), 50.0);
    const MatrixXcd zm = solve_pul(sys, 50.0).Z_full.topLeftCorner(2, 2);
    CHECK(rel(loop(zf), loop(zm)) < 5e-3);
    CHECK(std::abs(loop(zf).real() / loop(zm).real() - 1.0) < 5e-3);
    CHECK(std::abs(loop(zf).imag() / loop(zm).imag() - 1.0) < 5e-3);
}

TEST_CASE("Symmetry and passivity", "[filament]") {
    const auto sys = make_system({tube(-0.045, 0.02, 0.016, 58e6), tube(0, 0.02, 0.016, 58e6),
                                  tube(0.045, 0.02, 0.016, 58e6)});
    FilamentStats st;
    const auto z = filament_impedance(build_mesh(sys, 1e3), 1e3, &st);
    REQUIRE(z.rows() == 3);
    CHECK(st.ranks.size() == 3);
    CHECK((z - z.transpose()).norm() <= 1e-12 * z.norm());
    const Eigen::MatrixXd R = z.real();
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(R).eigenvalues().minCoeff() >= -1e-12 * R.norm());
}

TEST_CASE("Halving the filament size changes Z by < 0.5%", "[filament]") {
    MeshOptions fine;
    fine.refine = 2.0;
    const auto pair = make_system({solid(-0.035, 0.025, 58e5), solid(0.035, 0.025, 58e5)});
    for (double f : {50.0, 1e3}) {
        const auto a = loop(filament_impedance(build_mesh(pair, f), f));
        const auto b = loop(filament_impedance(build_mesh(pair, f, fine), f));
        INFO("pair, f = " << f);
        CHECK(std::abs(a.real() / b.real() - 1.0) < 5e-3);
        CHECK(std::abs(a.imag() / b.imag() - 1.0) < 5e-3);
    }
    const auto t = make_system({tube(-0.045, 0.02, 0.016, 58e6), tube(0.045, 0.02, 0.016, 58e6)});
    for (double f : {1e3, 1e4}) {
        const auto ma = build_mesh(t, f), mb = build_mesh(t, f, fine);
        CHECK(mb.count() > 3 * ma.count());
        const auto a = loop(filament_impedance(ma, f));
        const auto b = loop(filament_impedance(mb, f));
        INFO("tubes, f = " << f);
        CHECK(std::abs(a.real() / b.real() - 1.0) < 5e-3);
        CHECK(std::abs(a.imag() / b.imag() - 1.0) < 5e-3);
    }
}

TEST_CASE("Low-rank coupling is accurate", "[filament]") {
    // ACA blocks reproduce the dense log kernel
    const auto sys = make_system({solid(-0.035, 0.025, 58e5), tube(0.05, 0.02, 0.016, 58e6)});
    const auto m = build_mesh(sys, 1e3);
    Eigen::MatrixXd U, V;
    detail::aca(m.parts[0].filaments, m.parts[1].filaments, 1e-10, U, V);
    Eigen::MatrixXd K(m.parts[0].filaments.size(), m.parts[1].filaments.size());
    for (int i = 0; i < K.rows(); ++i)
        for (int j = 0; j < K.cols(); ++j) K(i, j) = detail::log_inv_dist(m.parts[0].filaments[i], m.parts[1].filaments[j]);
    CHECK((U * V.transpose() - K).norm() <= 1e-9 * K.norm());
    CHECK(U.cols() < 30);
}
