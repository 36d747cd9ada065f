#pragma once

// Surface admittance operators: scalar Y_n for solid conductors, 2x2 blocks
// [inner; outer] for hollow ones, assembled block-diagonally on the layout.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "layout.hpp"
#include "specfun.hpp"

namespace cableimp {

// k = sqrt(w mu (w eps - j sigma)), principal branch (Re k >= 0, Im k <= 0).
inline cplx wavenumber(double w, double mu, double eps, double sigma) {
    return std::sqrt(cplx(w * mu * w * eps, -w * mu * sigma));
}

struct Material {
    double sigma, mu, eps;
};

inline Material material_of(const ConductorSpec& c) { return {c.sigma, mu0 * c.mu_r, eps0 * c.eps_r}; }
inline Material material_of(const Medium& m) { return {0.0, m.mu(), m.eps()}; }

// z J'_n(z)/J_n(z) - n = -z J_{n+1}(z)/J_n(z); avoids the n/z cancellation.
inline cplx solid_term(int n, cplx z) { return -z * specfun::bessel_j_next_ratio(n, z); }

inline cplx solid_admittance(double radius, const Material& cond, const Material& med, double w, int n) {
    if (!(w > 0.0)) throw NumericalError("surfop: angular frequency must be > 0");
    n = std::abs(n);
    const cplx k = wavenumber(w, cond.mu, cond.eps, cond.sigma);
    const cplx ko = wavenumber(w, med.mu, med.eps, med.sigma);
    const cplx br = double(n) * (1.0 / cond.mu - 1.0 / med.mu) + solid_term(n, k * radius) / cond.mu -
                    solid_term(n, ko * radius) / med.mu;
    return 2.0 * pi / (jj * w) * br;
}

inline cplx solid_admittance(const ConductorSpec& c, const Medium& medium, double w, int n) {
    return solid_admittance(c.outer_radius, material_of(c), material_of(medium), w, n);
}

// 2x2 block, index 0 = inner contour, 1 = outer contour.
inline Eigen::Matrix2cd hollow_admittance(double outer, double inner, const Material& cond, const Material& med,
                                          double w, int n) {
    if (!(w > 0.0)) throw NumericalError("surfop: angular frequency must be > 0");
    n = std::abs(n);
    const cplx k = wavenumber(w, cond.mu, cond.eps, cond.sigma);
    const cplx ko = wavenumber(w, med.mu, med.eps, med.sigma);
    const auto c = specfun::cross_ratios(n, k * outer, k * inner);
    const auto c0 = specfun::cross_ratios(n, ko * outer, ko * inner);
    const cplx W = 4.0 * jj / pi;  // chi_n(b, b), Wronskian
    const cplx s = 2.0 * pi / (jj * w);
    Eigen::Matrix2cd Y;
    Y(0, 0) = s * (c.chi_ab / cond.mu - c0.chi_ab / med.mu);
    Y(0, 1) = s * W * (c0.inv_m / med.mu - c.inv_m / cond.mu);
    Y(1, 0) = Y(0, 1);
    Y(1, 1) = s * (c.chi_ba / cond.mu - c0.chi_ba / med.mu);
    return Y;
}

inline Eigen::Matrix2cd hollow_admittance(const ConductorSpec& c, const Medium& medium, double w, int n) {
    if (!c.hollow()) throw GeometryError("surfop: hollow_admittance on a solid conductor");
    return hollow_admittance(c.outer_radius, c.inner_radius, material_of(c), material_of(medium), w, n);
}

// Block-diagonal Y_s; only the blocks are stored.
struct SurfaceOperator {
    struct Block {
        int i0, i1;            // rows; i1 = -1 for a scalar (solid) block
        Eigen::Matrix2cd y;    // y(0,0) only for scalar blocks
    };
    std::vector<Block> blocks;
    int size = 0;
    double omega = 0.0;

    // Y_s * X
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& X) const {
        Eigen::MatrixXcd out(X.rows(), X.cols());
        for (const auto& b : blocks) {
            if (b.i1 < 0) {
                out.row(b.i0) = b.y(0, 0) * X.row(b.i0);
            } else {
                const Eigen::RowVectorXcd r0 = X.row(b.i0), r1 = X.row(b.i1);
                out.row(b.i0) = b.y(0, 0) * r0 + b.y(0, 1) * r1;
                out.row(b.i1) = b.y(1, 0) * r0 + b.y(1, 1) * r1;
            }
        }
        return out;
    }

    Eigen::MatrixXcd dense() const {
        Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(size, size);
        for (const auto& b : blocks) {
            if (b.i1 < 0) {
                D(b.i0, b.i0) = b.y(0, 0);
            } else {
                D(b.i0, b.i0) = b.y(0, 0);
                D(b.i0, b.i1) = b.y(0, 1);
                D(b.i1, b.i0) = b.y(1, 0);
                D(b.i1, b.i1) = b.y(1, 1);
            }
        }
        return D;
    }
};

inline SurfaceOperator assemble_Ys(const CableSystem& sys, const HarmonicLayout& L, double w) {
    if (L.conductors() != int(sys.size())) throw GeometryError("surfop: layout does not match system");
    SurfaceOperator S;
    S.size = L.size();
    S.omega = w;
    for (int p = 0; p < L.conductors(); ++p) {
        const auto& c = sys.conductors[p];
        const int N = L.order[p];
        // operators depend on |n| only: compute once per |n| and reuse bitwise
        for (int n = 0; n <= N; ++n) {
            Eigen::Matrix2cd y = Eigen::Matrix2cd::Zero();
            if (c.hollow()) y = hollow_admittance(c, sys.medium, w, n);
            else y(0, 0) = solid_admittance(c, sys.medium, w, n);
            for (int sgn : {-1, 1}) {
                if (n == 0 && sgn < 0) continue;
                const int nn = sgn * n;
                if (c.hollow()) S.blocks.push_back({L.index(p, true, nn), L.index(p, false, nn), y});
                else S.blocks.push_back({L.index(p, false, nn), -1, y});
            }
        }
    }
    return S;
}

}  // namespace cableimp
