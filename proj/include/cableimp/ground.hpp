#pragma once

// Classical (no-proximity) impedance of conductors in an infinite
// homogeneous earth, and its combination with the MoM proximity correction:
//   Z = Z_analytic + [Z_MoM(N) - Z_MoM(0)].
//
// Solid wires:  Z_int = (m/(2 pi a sigma)) I0(ma)/I1(ma)
// Earth self:   Z_gs  = (m_o/(2 pi a sigma_o)) K0(m_o a)/K1(m_o a)
// Earth mutual: Z_gm  = K0(m_o D) / (2 pi a_i a_j sigma_o K1(m_o a_i) K1(m_o a_j))
// with m = sqrt(j w mu sigma). Concentric groups (core/sheath/...) are handled
// by the loop formulation with Schelkunoff tube impedances.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "model.hpp"
#include "solver.hpp"
#include "specfun.hpp"

namespace cableimp {

inline cplx skin_m(double w, double mu, double sigma) { return std::sqrt(jj * w * mu * sigma); }

// Internal impedance of a solid round wire.
inline cplx solid_internal_impedance(double a, double sigma, double mu, double w) {
    const cplx m = skin_m(w, mu, sigma);
    const cplx z = m * a;
    const cplx ratio = specfun::bessel_i(0, z, true) / specfun::bessel_i(1, z, true);
    return m / (2.0 * pi * a * sigma) * ratio;
}

struct TubeImpedance {
    cplx zaa;  // inner-surface impedance (return path inside the cavity)
    cplx zbb;  // outer surface
    cplx zab;  // transfer
};

// Schelkunoff tube impedances, inner radius a, outer radius b.
inline TubeImpedance tube_impedance(double a, double b, double sigma, double mu, double w) {
    if (!(0.0 < a && a < b)) throw GeometryError("tube_impedance: need 0 < a < b");
    const cplx m = skin_m(w, mu, sigma);
    const cplx za = m * a, zb = m * b;
    using specfun::bessel_i;
    using specfun::bessel_k;
    const cplx i0a = bessel_i(0, za, true), i1a = bessel_i(1, za, true);
    const cplx i0b = bessel_i(0, zb, true), i1b = bessel_i(1, zb, true);
    const cplx k0a = bessel_k(0, za, true), k1a = bessel_k(1, za, true);
    const cplx k0b = bessel_k(0, zb, true), k1b = bessel_k(1, zb, true);
    // I~ = I exp(-Re z), K~ = K exp(z). Products I(mb)K(ma) carry exp(L1),
    // I(ma)K(mb) carry exp(L2), Re L1 >= Re L2.
    const cplx L1 = zb.real() - za, L2 = za.real() - zb;
    const cplx e21 = std::exp(L2 - L1);
    const cplx D = i1b * k1a - i1a * k1b * e21;
    TubeImpedance t;
    t.zaa = m / (2.0 * pi * a * sigma) * (k0a * i1b + i0a * k1b * e21) / D;
    t.zbb = m / (2.0 * pi * b * sigma) * (i0b * k1a + k0b * i1a * e21) / D;
    t.zab = std::exp(-L1) / (2.0 * pi * a * b * sigma * D);
    return t;
}

inline cplx earth_self_impedance(double a, double sigma0, double w) {
    const cplx mo = skin_m(w, mu0, sigma0);
    const cplx z = mo * a;
    return mo / (2.0 * pi * a * sigma0) * specfun::bessel_k(0, z, true) / specfun::bessel_k(1, z, true);
}

inline cplx earth_mutual_impedance(double ai, double aj, double D, double sigma0, double w) {
    const cplx mo = skin_m(w, mu0, sigma0);
    // K0(mo D)/(K1(mo ai) K1(mo aj)) = ratio of scaled values * exp(-mo (D - ai - aj))
    const cplx r = specfun::bessel_k(0, mo * D, true) /
                   (specfun::bessel_k(1, mo * ai, true) * specfun::bessel_k(1, mo * aj, true));
    return r * std::exp(-mo * (D - ai - aj)) / (2.0 * pi * ai * aj * sigma0);
}

// Earth skin depth.
inline double earth_skin_depth(double sigma0, double w) { return std::sqrt(2.0 / (w * mu0 * sigma0)); }

// Concentric groups among the user conductors, each ordered inner to outer.
inline std::vector<std::vector<int>> coaxial_groups(const CableSystem& sys) {
    const int P = int(sys.user_count());
    std::vector<int> parent(P, -1);
    for (int q = 0; q < P; ++q) {
        // innermost enclosing conductor of q
        double best = 1e300;
        for (int p = 0; p < P; ++p) {
            if (p == q) continue;
            if (!detail::inside_cavity(sys.conductors[p], sys.conductors[q])) continue;
            const double d = std::abs(sys.conductors[p].center() - sys.conductors[q].center());
            if (d > 1e-12 * sys.conductors[p].outer_radius)
                throw GeometryError("ground: non-concentric enclosure is not supported by the analytic model");
            if (sys.conductors[p].inner_radius < best) {
                best = sys.conductors[p].inner_radius;
                parent[q] = p;
            }
        }
    }
    std::vector<std::vector<int>> groups;
    std::vector<int> child_count(P, 0);
    for (int q = 0; q < P; ++q)
        if (parent[q] >= 0) ++child_count[parent[q]];
    for (int p = 0; p < P; ++p)
        if (child_count[p] > 1) throw GeometryError("ground: more than one conductor inside a cavity");
    for (int top = 0; top < P; ++top) {
        if (parent[top] >= 0) continue;
        std::vector<int> chain{top};
        for (bool found = true; found;) {
            found = false;
            for (int q = 0; q < P; ++q)
                if (parent[q] == chain.back()) {
                    chain.push_back(q);
                    found = true;
                    break;
                }
        }
        std::reverse(chain.begin(), chain.end());
        groups.push_back(chain);
    }
    return groups;
}

struct GroundAnalytic {
    MatrixXcd Z;                        // user_count x user_count, Ohm/m
    std::vector<std::string> warnings;
};

// Z_c + Z_g for all user conductors (auto tube excluded).
inline GroundAnalytic ground_analytic(const CableSystem& sys, double f) {
    if (sys.ground.model != GroundModel::InfiniteEarthAnalytic)
        throw GeometryError("ground_analytic: unsupported ground model (set ground.model)");
    const double w = 2.0 * pi * f;
    const double s0 = sys.ground.sigma;
    const int P = int(sys.user_count());
    GroundAnalytic out;
    out.Z = MatrixXcd::Zero(P, P);
    const auto groups = coaxial_groups(sys);
    const double mu_med = sys.medium.mu();

    for (const auto& g : groups) {
        const int K = int(g.size());
        // loop impedances, loop k: conductor g[k] out, g[k+1] (or earth) back
        MatrixXcd Zl = MatrixXcd::Zero(K, K);
        std::vector<TubeImpedance> tubes(K);
        for (int k = 0; k < K; ++k) {
            const auto& c = sys.conductors[g[k]];
            if (c.hollow()) tubes[k] = tube_impedance(c.inner_radius, c.outer_radius, c.sigma, mu0 * c.mu_r, w);
        }
        for (int k = 0; k < K; ++k) {
            const auto& c = sys.conductors[g[k]];
            const cplx z_out = c.hollow() ? tubes[k].zbb : solid_internal_impedance(c.outer_radius, c.sigma, mu0 * c.mu_r, w);
            if (k + 1 < K) {
                const auto& nxt = sys.conductors[g[k + 1]];
                Zl(k, k) = z_out + jj * w * mu_med / (2.0 * pi) * std::log(nxt.inner_radius / c.outer_radius) +
                           tubes[k + 1].zaa;
                Zl(k, k + 1) = Zl(k + 1, k) = -tubes[k + 1].zab;
            } else {
                Zl(k, k) = z_out + earth_self_impedance(c.outer_radius, s0, w);
            }
        }
        // phase = T Zl T^T, T(i,k) = 1 for k >= i
        MatrixXcd T = MatrixXcd::Zero(K, K);
        for (int i = 0; i < K; ++i)
            for (int k = i; k < K; ++k) T(i, k) = 1.0;
        const MatrixXcd Zp = T * Zl * T.transpose();
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) out.Z(g[i], g[j]) = Zp(i, j);
    }
    // earth mutual coupling between groups, through their outermost radii
    double max_spacing = 0.0;
    for (std::size_t a = 0; a < groups.size(); ++a)
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            const auto& ca = sys.conductors[groups[a].back()];
            const auto& cb = sys.conductors[groups[b].back()];
            const double D = std::abs(ca.center() - cb.center());
            max_spacing = std::max(max_spacing, D);
            const cplx zm = earth_mutual_impedance(ca.outer_radius, cb.outer_radius, D, s0, w);
            for (int i : groups[a])
                for (int j : groups[b]) out.Z(i, j) = out.Z(j, i) = zm;
        }
    const double delta = earth_skin_depth(s0, w);
    if (max_spacing > 0.0 && delta < 10.0 * max_spacing)
        out.warnings.push_back("earth penetration depth " + std::to_string(delta) +
                               " m is below 10x the conductor spacing at f = " + std::to_string(f) + " Hz");
    return out;
}

struct GroundCorrectionParts {
    MatrixXcd analytic;  // Z_c + Z_g
    MatrixXcd delta;     // proximity correction
    MatrixXcd combined;
    std::vector<std::string> warnings;
};

inline MatrixXcd combine_ground(const MatrixXcd& analytic, const MatrixXcd& delta) {
    if (analytic.rows() != delta.rows() || analytic.cols() != delta.cols())
        throw GeometryError("combine_ground: dimension mismatch (the MoM runs must use the auto return tube)");
    return analytic + delta;
}

// Full additive pipeline at one frequency.
inline GroundCorrectionParts ground_pipeline(const CableSystem& sys, double f) {
    if (!sys.auto_return())
        throw GeometryError("ground pipeline needs the auto return tube so that dimensions match the analytic model");
    GroundCorrectionParts g;
    auto an = ground_analytic(sys, f);
    g.analytic = an.Z;
    g.warnings = an.warnings;
    g.delta = proximity_delta(sys, f);
    g.combined = combine_ground(g.analytic, g.delta);
    return g;
}

}  // namespace cableimp
