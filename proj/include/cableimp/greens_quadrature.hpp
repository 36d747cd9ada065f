#pragma once

// Quadrature oracle for the Green's matrix entries (independent of the
// closed forms). Same-circle and concentric pairs reduce exactly to a 1-D
// integral in the angle difference (tanh-sinh, log singularity at the ends);
// everything else is a nested adaptive trapezoidal rule, which converges
// geometrically for these periodic analytic integrands and terminates on an
// L1-relative error, so structurally zero entries do not stall it.

#include <cmath>
#include <complex>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>

#include "greens.hpp"

namespace cableimp {

struct QuadratureResult {
    cplx value;
    double error;  // achieved error estimate
};

inline QuadratureResult greens_entry_quadrature(const Contour& p, const Contour& q, int m, int n,
                                                double tol = 1e-12) {
    using boost::math::quadrature::tanh_sinh;
    using boost::math::quadrature::trapezoidal;
    if (tol < 1e-15) tol = 1e-15;
    const double twopi = 2.0 * pi;
    const double norm = 1.0 / (4.0 * pi * pi) / (2.0 * pi);
    const double d = std::abs(p.center - q.center);
    const double scale = std::max(p.radius, q.radius);

    if (d <= 1e-12 * scale) {
        if (m != n) return {0.0, 0.0};
        // Integral over t gives 2 pi; remaining 1-D integral over phi = t - t'.
        double err_re = 0.0, err_im = 0.0;
        auto kern = [&](double phi) {
            if (std::abs(p.radius - q.radius) <= 1e-12 * scale)
                return std::log(2.0 * p.radius * std::abs(std::sin(0.5 * phi)));
            return std::log(std::abs(p.radius - q.radius * std::polar(1.0, -phi)));
        };
        tanh_sinh<double> ts;
        const double re = ts.integrate([&](double phi) { return kern(phi) * std::cos(n * phi); }, 0.0, twopi,
                                       tol, &err_re);
        const double im = ts.integrate([&](double phi) { return -kern(phi) * std::sin(n * phi); }, 0.0, twopi,
                                       tol, &err_im);
        return {twopi * norm * cplx(re, im), twopi * norm * std::hypot(err_re, err_im)};
    }

    // Nested: inner over t' for fixed t, outer over t. Real and imaginary
    // parts integrated separately.
    double max_inner_err = 0.0;
    auto inner = [&](double t, bool want_im) {
        const cplx rp = p.center + std::polar(p.radius, t);
        auto f = [&](double tp) {
            const cplx rq = q.center + std::polar(q.radius, tp);
            const double lg = std::log(std::abs(rp - rq));
            const double ph = n * tp - m * t;
            return lg * (want_im ? std::sin(ph) : std::cos(ph));
        };
        double err = 0.0;
        const double v = trapezoidal(f, 0.0, twopi, tol * 0.1, 12, &err);
        max_inner_err = std::max(max_inner_err, err);
        return v;
    };
    double e_re = 0.0, e_im = 0.0;
    const double re = trapezoidal([&](double t) { return inner(t, false); }, 0.0, twopi, tol, 12, &e_re);
    const double im = trapezoidal([&](double t) { return inner(t, true); }, 0.0, twopi, tol, 12, &e_im);
    const double err = std::hypot(e_re, e_im) + twopi * max_inner_err;
    return {norm * cplx(re, im), norm * err};
}

// Whole-matrix quadrature (oracle run over a layout).
inline GreensMatrix assemble_G_quadrature(const HarmonicLayout& L, double tol = 1e-12) {
    const int M = L.size();
    GreensMatrix G(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            G(i, j) = greens_entry_quadrature({L.rows[i].center, L.rows[i].radius},
                                              {L.rows[j].center, L.rows[j].radius}, L.rows[i].n, L.rows[j].n,
                                              tol).value;
    return G;
}

}  // namespace cableimp
