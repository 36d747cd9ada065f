#pragma once

// Harmonic discretisation of the 2-D log-kernel Green's function:
//
//   G^{pq}_{mn} = 1/(4 pi^2) \iint (1/2pi) ln|r_p(t) - r_q(t')| e^{j n t'} e^{-j m t} dt dt'
//
// Closed forms follow from ln|r - r'| = ln rho_> - sum_k (1/k)(rho_</rho_>)^k cos k(.)
// combined with the binomial shift of circle centres. Entries are complex in
// general (real only when all centres are collinear on the x axis).

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "layout.hpp"

namespace cableimp {

struct Contour {
    cplx center;
    double radius;
};

enum class ContourRelation { Same, Concentric, Disjoint, QInsideP, PInsideQ };

inline ContourRelation classify(const Contour& p, const Contour& q) {
    const double d = std::abs(p.center - q.center);
    const double scale = std::max(p.radius, q.radius);
    const double tol = 1e-12 * scale;
    if (d <= tol) {
        if (std::abs(p.radius - q.radius) <= tol) return ContourRelation::Same;
        return ContourRelation::Concentric;
    }
    if (d + q.radius <= p.radius + tol) return ContourRelation::QInsideP;
    if (d + p.radius <= q.radius + tol) return ContourRelation::PInsideQ;
    if (d >= p.radius + q.radius - tol) return ContourRelation::Disjoint;
    throw GeometryError("greens: overlapping contours");
}

// Pascal triangle up to row kmax.
class Binomial {
public:
    explicit Binomial(int kmax) : n_(kmax + 1), c_((kmax + 1) * (kmax + 1), 0.0) {
        for (int k = 0; k <= kmax; ++k) {
            at(k, 0) = 1.0;
            for (int j = 1; j <= k; ++j) at(k, j) = at(k - 1, j - 1) + (j <= k - 1 ? at(k - 1, j) : 0.0);
        }
    }
    double operator()(int k, int j) const { return c_[k * n_ + j]; }

private:
    double& at(int k, int j) { return c_[k * n_ + j]; }
    int n_;
    std::vector<double> c_;
};

namespace detail {

inline cplx greens_entry_impl(const Contour& p, const Contour& q, int m, int n, const Binomial& C) {
    constexpr double inv4pi = 1.0 / (4.0 * pi);
    const double inv2pi = 1.0 / (2.0 * pi);
    switch (classify(p, q)) {
    case ContourRelation::Same:
    case ContourRelation::Concentric: {
        if (m != n) return 0.0;
        const double rmax = std::max(p.radius, q.radius), rmin = std::min(p.radius, q.radius);
        if (m == 0) return std::log(rmax) * inv2pi;
        return -std::pow(rmin / rmax, std::abs(m)) * inv4pi / std::abs(m);
    }
    case ContourRelation::QInsideP: {
        if (m == 0 && n == 0) return std::log(p.radius) * inv2pi;
        const cplx e = q.center - p.center;
        if (m < 0 && n <= 0 && -n <= -m) {
            const int k = -m, j = -n;
            return -inv4pi / k * C(k, j) * std::pow(e, k - j) * std::pow(q.radius, j) / std::pow(p.radius, k);
        }
        if (m > 0 && n >= 0 && n <= m) {
            const int k = m, j = n;
            return std::conj(-inv4pi / k * C(k, j) * std::pow(e, k - j) * std::pow(q.radius, j) / std::pow(p.radius, k));
        }
        return 0.0;
    }
    case ContourRelation::PInsideQ: {
        if (m == 0 && n == 0) return std::log(q.radius) * inv2pi;
        const cplx e = p.center - q.center;
        if (m >= 0 && n > 0 && m <= n) {
            const int k = n, j = m;
            return -inv4pi / k * C(k, j) * std::pow(e, k - j) * std::pow(p.radius, j) / std::pow(q.radius, k);
        }
        if (m <= 0 && n < 0 && -m <= -n) {
            const int k = -n, j = -m;
            return std::conj(-inv4pi / k * C(k, j) * std::pow(e, k - j) * std::pow(p.radius, j) / std::pow(q.radius, k));
        }
        return 0.0;
    }
    case ContourRelation::Disjoint: {
        const cplx d = p.center - q.center;
        if (m == 0 && n == 0) return std::log(std::abs(d)) * inv2pi;
        if (m >= 0 && n <= 0) {
            const int k = m - n;
            const double sgn = (k % 2) ? 1.0 : -1.0;  // (-1)^{k+1}
            return inv4pi * sgn / k * C(k, m) * std::pow(p.radius, m) * std::pow(-q.radius, -n) / std::pow(d, k);
        }
        if (m <= 0 && n >= 0) {
            const int k = n - m;
            const double sgn = (k % 2) ? 1.0 : -1.0;
            return inv4pi * sgn / k * C(k, -m) * std::pow(p.radius, -m) * std::pow(-q.radius, n) /
                   std::pow(std::conj(d), k);
        }
        return 0.0;
    }
    }
    return 0.0;
}

}  // namespace detail

// Single closed-form entry G^{pq}_{mn}.
inline cplx greens_entry(const Contour& p, const Contour& q, int m, int n) {
    const Binomial C(std::abs(m) + std::abs(n));
    return detail::greens_entry_impl(p, q, m, n, C);
}

using GreensMatrix = Eigen::MatrixXcd;

// Dense M x M matrix for the whole layout; built once per geometry.
inline GreensMatrix assemble_G(const HarmonicLayout& L) {
    const int M = L.size();
    const Binomial C(2 * L.max_order());
    GreensMatrix G(M, M);
    for (int i = 0; i < M; ++i) {
        const auto& ri = L.rows[i];
        const Contour cp{ri.center, ri.radius};
        for (int j = 0; j < M; ++j) {
            const auto& rj = L.rows[j];
            G(i, j) = detail::greens_entry_impl(cp, {rj.center, rj.radius}, ri.n, rj.n, C);
        }
    }
    return G;
}

inline GreensMatrix assemble_G(const CableSystem& sys, const HarmonicLayout& L) {
    throw_if_invalid(sys);
    return assemble_G(L);
}

}  // namespace cableimp
