#pragma once

// Complex Bessel, Hankel and modified Bessel functions of integer order,
// with exponentially scaled outputs so that the cross products used by the
// surface operators stay representable at high frequency and conductivity.
//
// Scaling conventions (all orders share the factor of their kind):
//   J, Y  : value * exp(-|Im z|)
//   H1    : value * exp(-i z)
//   H2    : value * exp(+i z)
//   I     : value * exp(-|Re z|)
//   K     : value * exp(+z)
//
// Y, H and K are evaluated for Re z >= 0 only (the solver never needs the
// left half-plane). J accepts any z.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"

namespace cableimp::specfun {

// Crossover radii, frozen after comparison with a 50-digit oracle.
inline constexpr double kSeriesRadius = 1.0;
inline constexpr double kAsymptoticRadius = 18.0;
inline constexpr double kDirectH2Imag = 1.0;   // J - iY is used for H2 when |Im z| <= this
inline constexpr double kDirectH2Radius = 2.0; // ... or when |z| < this
inline constexpr int kMaxOrder = 64;
inline constexpr double kLargeRadius = 1e3;    // beyond this J is rebuilt from the Hankels

struct Table {
    std::vector<cplx> j, y, h1, h2;  // scaled, orders 0..nmax
};

struct HankelPair {
    cplx h1, h2, dh1, dh2;
};

namespace detail {

inline constexpr double euler_gamma = 0.57721566490153286061;

inline void check_arg(cplx z, int n) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw NumericalError("specfun: non-finite argument");
    if (n < 0 || n > kMaxOrder)
        throw NumericalError("specfun: order " + std::to_string(n) + " outside [0, " +
                             std::to_string(kMaxOrder) + "]");
}

// J_n, n = 0..nmax, by power series; scaled by exp(-|Im z|).
inline void j_series(int nmax, cplx z, std::vector<cplx>& j) {
    const cplx q = -0.25 * z * z;
    const double sc = std::exp(-std::abs(z.imag()));
    cplx lead = sc;  // (z/2)^n / n! * exp(-s)
    for (int n = 0; n <= nmax; ++n) {
        cplx term = lead, sum = lead;
        for (int k = 1; k < 200; ++k) {
            term *= q / (double(k) * double(n + k));
            sum += term;
            if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        }
        j[n] = sum;
        lead *= 0.5 * z / double(n + 1);
    }
}

// Y0, Y1 by their ascending series; scaled by exp(-|Im z|). Needs j[0], j[1].
inline void y01_series(cplx z, const std::vector<cplx>& j, cplx& y0, cplx& y1) {
    const double sc = std::exp(-std::abs(z.imag()));
    const cplx lg = std::log(0.5 * z) + euler_gamma;
    const cplx q = 0.25 * z * z;
    // Y0 = (2/pi)[lg J0 + sum_{k>=1} (-1)^{k+1} H_k q^k/(k!)^2]
    cplx t = 1.0, s0 = 0.0;
    double hk = 0.0;
    for (int k = 1; k < 200; ++k) {
        t *= -q / (double(k) * double(k));
        hk += 1.0 / k;
        const cplx term = -hk * t;
        s0 += term;
        if (std::abs(term) <= 1e-17 * std::abs(s0)) break;
    }
    y0 = (2.0 / pi) * (lg * j[0] + sc * s0);
    // Y1 = -2/(pi z) + (2/pi) lg J1 - (z/(2 pi)) sum_k (H_k + H_{k+1} - 1 ... )
    // written with psi(k+1)+psi(k+2) = -2 gamma + H_k + H_{k+1}:
    // Y1 = -2/(pi z) + (2/pi) ln(z/2) J1 - (z/(2pi)) sum_k (psi(k+1)+psi(k+2)) (-q)^k/(k!(k+1)!)
    const cplx lz = std::log(0.5 * z);
    cplx tk = 1.0, s1 = 0.0;
    double hsum_k = 0.0, hsum_k1 = 1.0;
    for (int k = 0; k < 200; ++k) {
        if (k > 0) {
            tk *= -q / (double(k) * double(k + 1));
            hsum_k += 1.0 / k;
            hsum_k1 += 1.0 / (k + 1);
        }
        const cplx term = (-2.0 * euler_gamma + hsum_k + hsum_k1) * tk;
        s1 += term;
        if (k > 0 && std::abs(term) <= 1e-17 * std::abs(s1)) break;
    }
    y1 = sc * (-2.0 / (pi * z)) + (2.0 / pi) * lz * j[1] - sc * (z / (2.0 * pi)) * s1;
}

// Miller backward recurrence for J_0..J_nmax, normalised with
// exp(iz) = J0 + 2 sum i^k J_k. z must satisfy Im z <= 0. Returns the
// unnormalised start order actually used; all of j[0..len) filled (scaled).
inline void j_miller(int nmax, cplx z, std::vector<cplx>& j) {
    const double az = std::abs(z);
    // Start order from forward growth of the dominant solution.
    int nstart = std::max(nmax, int(az)) + 1;
    {
        cplx pm = 0.0, p = 1.0;
        int n = nstart;
        while (std::abs(p) < 1e17 && n < nstart + 100000) {
            const cplx pn = (2.0 * n / z) * p - pm;
            pm = p;
            p = pn;
            ++n;
        }
        nstart = n + 8;
    }
    j.assign(std::max(nstart, nmax) + 2, cplx(0.0));
    cplx fp1 = 0.0, f = 1e-300;
    cplx sum = 0.0;
    static const cplx ipow[4] = {1.0, jj, -1.0, -jj};
    for (int k = nstart; k >= 1; --k) {
        const cplx fm1 = (2.0 * k / z) * f - fp1;
        j[k] = f;
        sum += 2.0 * ipow[k % 4] * f;
        fp1 = f;
        f = fm1;
        if (std::abs(f) > 1e250) {
            const double r = 1e-250;
            for (int i = k; i <= nstart; ++i) j[i] *= r;
            f *= r;
            fp1 *= r;
            sum *= r;
        }
    }
    j[0] = f;
    sum += f;
    // exp(iz) * exp(-|Im z|) = exp(i Re z) for Im z <= 0
    const cplx norm = std::polar(1.0, z.real()) / sum;
    for (auto& v : j) v *= norm;
}

// Hankel asymptotic series for orders 0 and 1, Amos scaled. Valid for
// |z| large and -pi/2 <= arg z <= pi/2.
inline void hankel_asymptotic(cplx z, cplx h1[2], cplx h2[2]) {
    for (int nu = 0; nu <= 1; ++nu) {
        const double mu = 4.0 * nu * nu;
        cplx s1 = 1.0, s2 = 1.0, ak = 1.0;
        double prev = 1.0;
        for (int k = 1; k < 200; ++k) {
            const double odd = 2.0 * k - 1.0;
            ak *= (mu - odd * odd) / (8.0 * k) / z;
            const double mag = std::abs(ak);
            if (mag > prev) break;
            const cplx ik = std::pow(jj, k);
            s1 += ik * ak;
            s2 += std::conj(ik) * ak;
            prev = mag;
            if (mag < 1e-17) break;
        }
        const cplx pre = std::sqrt(2.0 / (pi * z));
        const double ph = -nu * pi / 2.0 - pi / 4.0;
        h1[nu] = pre * std::polar(1.0, ph) * s1;
        h2[nu] = pre * std::polar(1.0, -ph) * s2;
    }
}

// Steed's second continued fraction: H1'_0(w)/H1_0(w), w in the closed
// upper half-plane with |w| >~ 2.
inline cplx hankel1_logderiv0(cplx w) {
    const double tiny = 1e-300;
    // p + iq = -1/(2w) + i + (i/w) * a1/(b1 + a2/(b2 + ...)),
    // a_k = (k - 1/2)^2, b_k = 2(w + k i).
    auto a = [](int k) { const double h = k - 0.5; return h * h; };
    auto b = [&](int k) { return 2.0 * (w + double(k) * jj); };
    // Lentz on 1/(b1 + a2/(b2 + ...)) then times a1
    cplx f = b(1), c = f, d = 0.0;
    if (std::abs(f) < tiny) f = tiny;
    c = f;
    int k = 2;
    for (; k < 100000; ++k) {
        d = b(k) + a(k) * d;
        if (std::abs(d) < tiny) d = tiny;
        c = b(k) + a(k) / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const cplx del = c * d;
        f *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    if (k >= 100000) throw NumericalError("specfun: Hankel continued fraction did not converge");
    return -1.0 / (2.0 * w) + jj + (jj / w) * a(1) / f;
}

// Core evaluation in the closed fourth quadrant (Re z >= 0, Im z <= 0).
inline void eval_lower(int nmax, cplx z, Table& t) {
    const double az = std::abs(z);
    const double s = -z.imag();
    t.j.assign(nmax + 2, 0.0);
    t.y.assign(nmax + 2, 0.0);
    t.h1.assign(nmax + 2, 0.0);
    t.h2.assign(nmax + 2, 0.0);
    const int top = nmax + 1;

    std::vector<cplx> jv(top + 1);
    cplx y0 = 0.0, y1 = 0.0, g1[2], g2[2];  // g: Amos-scaled Hankel orders 0,1
    bool have_h = false;

    if (az <= kSeriesRadius) {
        j_series(top, z, jv);
        y01_series(z, jv, y0, y1);
    } else if (az >= kLargeRadius) {
        // Miller's start order grows with |z|; here n << |z|, so both Hankels
        // recur forward stably and J = (H1 + H2)/2 is not minimal.
        hankel_asymptotic(z, g1, g2);
        have_h = true;
        std::vector<cplx> a(top + 1), b(top + 1);
        a[0] = g1[0], a[1] = g1[1], b[0] = g2[0], b[1] = g2[1];
        for (int n = 1; n < top; ++n) {
            a[n + 1] = (2.0 * n / z) * a[n] - a[n - 1];
            b[n + 1] = (2.0 * n / z) * b[n] - b[n - 1];
        }
        const cplx p1 = std::polar(1.0, z.real()), p2 = std::polar(std::exp(-2.0 * s), -z.real());
        for (int n = 0; n <= top; ++n) jv[n] = 0.5 * (a[n] * p1 + b[n] * p2);
    } else {
        std::vector<cplx> jm;
        j_miller(top, z, jm);
        for (int n = 0; n <= top; ++n) jv[n] = jm[n];
        if (az < kAsymptoticRadius) {
            // Neumann series: Y0 and its derivative
            const cplx lg = std::log(0.5 * z) + euler_gamma;
            cplx s0 = 0.0, sd = 0.0;
            const int kmax = (int(jm.size()) - 2) / 2;
            for (int k = 1; k <= kmax; ++k) {
                const double sg = (k % 2) ? -1.0 : 1.0;
                s0 += sg * jm[2 * k] / double(k);
                sd += sg * 0.5 * (jm[2 * k - 1] - jm[2 * k + 1]) / double(k);
            }
            y0 = (2.0 / pi) * (lg * jm[0] - 2.0 * s0);
            y1 = -(2.0 / pi) * (jm[0] / z - lg * jm[1] - 2.0 * sd);
        } else {
            hankel_asymptotic(z, g1, g2);
            have_h = true;
        }
    }

    for (int n = 0; n <= top; ++n) t.j[n] = jv[n];

    // H2 is the only stable direction for forward recurrence in the lower
    // half-plane; H1 and Y are rebuilt from H2 and the (minimal) J.
    if (have_h) {
        t.h2[0] = g2[0];
        t.h2[1] = g2[1];
    } else if (az <= kSeriesRadius || s <= kDirectH2Imag || az < kDirectH2Radius) {
        // H2 exp(iz) = (J~ - iY~) exp(2s) exp(i Re z)
        const cplx f = std::polar(std::exp(2.0 * s), z.real());
        t.h2[0] = (t.j[0] - jj * y0) * f;
        t.h2[1] = (t.j[1] - jj * y1) * f;
    } else {
        // H2'/H2 = conj(H1'/H1 at conj z); Wronskian J H2' - J' H2 = -2i/(pi z)
        const cplx q = std::conj(hankel1_logderiv0(std::conj(z)));
        const cplx base = -2.0 * jj / (pi * z * (q * t.j[0] + t.j[1]));
        t.h2[0] = base * std::polar(1.0, z.real());
        t.h2[1] = -q * t.h2[0];
    }
    for (int n = 1; n < top; ++n) t.h2[n + 1] = (2.0 * n / z) * t.h2[n] - t.h2[n - 1];

    // H2 in the J scaling: h2 exp(-i Re z) exp(-2s)
    const cplx h2_to_j = std::polar(std::exp(-2.0 * s), -z.real());
    const cplx j_to_h1 = std::polar(1.0, -z.real());
    for (int n = 0; n <= top; ++n) {
        const cplx h2j = t.h2[n] * h2_to_j;
        t.h1[n] = (2.0 * t.j[n] - h2j) * j_to_h1;
        t.y[n] = jj * (h2j - t.j[n]);
    }
}

}  // namespace detail

// Scaled J, Y, H1, H2 for orders 0..nmax+1 (one guard order for derivatives).
inline Table table(int nmax, cplx z, bool need_y = true) {
    detail::check_arg(z, nmax);
    Table t;
    if (z == cplx(0.0)) {
        if (need_y) throw NumericalError("specfun: Y/H pole at z = 0");
        t.j.assign(nmax + 2, 0.0);
        t.j[0] = 1.0;
        return t;
    }
    if (z.real() < 0.0) {
        if (need_y) throw NumericalError("specfun: Y/H require Re z >= 0");
        Table u = table(nmax, -z, false);
        for (int n = 1; n < int(u.j.size()); n += 2) u.j[n] = -u.j[n];
        return u;
    }
    if (!need_y && std::abs(z) <= kSeriesRadius) {
        t.j.assign(nmax + 2, 0.0);
        detail::j_series(nmax + 1, z, t.j);
        return t;
    }
    if (z.imag() <= 0.0) {
        detail::eval_lower(nmax, z, t);
        return t;
    }
    detail::eval_lower(nmax, std::conj(z), t);
    for (auto& v : t.j) v = std::conj(v);
    for (auto& v : t.y) v = std::conj(v);
    std::swap(t.h1, t.h2);
    for (auto& v : t.h1) v = std::conj(v);
    for (auto& v : t.h2) v = std::conj(v);
    return t;
}

// Derivative from the scaled table: f'_n = (f_{n-1} - f_{n+1})/2, f'_0 = -f_1.
inline cplx deriv(const std::vector<cplx>& f, int n) {
    return n == 0 ? -f[1] : 0.5 * (f[n - 1] - f[n + 1]);
}

namespace detail {
inline cplx unscale(cplx v, cplx logf, const char* what) {
    const cplx r = v * std::exp(logf);
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
        throw NumericalError(std::string("specfun: ") + what + " overflows without scaling");
    return r;
}
}  // namespace detail

inline cplx bessel_j(int n, cplx z, bool scaled = false) {
    const cplx v = table(n, z, false).j[n];
    return scaled ? v : detail::unscale(v, std::abs(z.imag()), "J");
}

inline cplx bessel_y(int n, cplx z, bool scaled = false) {
    const cplx v = table(n, z).y[n];
    return scaled ? v : detail::unscale(v, std::abs(z.imag()), "Y");
}

inline cplx hankel1(int n, cplx z, bool scaled = false) {
    const cplx v = table(n, z).h1[n];
    return scaled ? v : detail::unscale(v, jj * z, "H1");
}

inline cplx hankel2(int n, cplx z, bool scaled = false) {
    const cplx v = table(n, z).h2[n];
    return scaled ? v : detail::unscale(v, -jj * z, "H2");
}

inline HankelPair hankel_pair(int n, cplx z, bool scaled = false) {
    const Table t = table(n, z);
    HankelPair p{t.h1[n], t.h2[n], deriv(t.h1, n), deriv(t.h2, n)};
    if (!scaled) {
        p.h1 = detail::unscale(p.h1, jj * z, "H1");
        p.dh1 = detail::unscale(p.dh1, jj * z, "H1'");
        p.h2 = detail::unscale(p.h2, -jj * z, "H2");
        p.dh2 = detail::unscale(p.dh2, -jj * z, "H2'");
    }
    return p;
}

// J_{n+1}(z)/J_n(z) by the first continued fraction (modified Lentz).
inline cplx bessel_j_next_ratio(int n, cplx z) {
    detail::check_arg(z, n);
    if (z == cplx(0.0)) return 0.0;
    const double tiny = 1e-300;
    // J_{n+1}/J_n = 1/(b_{n+1} - 1/(b_{n+2} - ...)), b_k = 2k/z
    cplx f = tiny, c = f, d = 0.0;
    int it = 0;
    for (int k = n + 1; it < 200000; ++k, ++it) {
        const cplx bk = 2.0 * double(k) / z;
        const double ak = (it == 0) ? 1.0 : -1.0;
        d = bk + ak * d;
        if (std::abs(d) < tiny) d = tiny;
        c = bk + ak / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const cplx del = c * d;
        f *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    if (it >= 200000) throw NumericalError("specfun: J ratio continued fraction did not converge");
    if (!std::isfinite(std::abs(f)))
        throw NumericalError("specfun: argument at a zero of J_n");
    return f;
}

// J'_n(z)/J_n(z), never forming J_n.
inline cplx bessel_ratio(int n, cplx z) {
    detail::check_arg(z, n);
    if (z == cplx(0.0)) {
        if (n == 0) return 0.0;
        throw NumericalError("specfun: J'_n/J_n pole at z = 0");
    }
    const cplx r = bessel_j_next_ratio(n, z);
    const cplx out = double(n) / z - r;
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag()))
        throw NumericalError("specfun: argument at a zero of J_n");
    return out;
}

// A complex number stored as mantissa * exp(log_scale).
struct Scaled {
    cplx mant;
    cplx log_scale;
    cplx value() const { return detail::unscale(mant, log_scale, "kernel"); }
};

// Ratios entering the hollow operator, all for m = m_n(alpha, beta) in the
// Hankel (first/second kind) normalisation:
//   chi_ab = chi_n(alpha, beta)/m,  chi_ba = chi_n(beta, alpha)/m,  inv_m = 1/m.
// Both the (H1, H2) and (J, Y) bases are tried; the better conditioned
// difference is kept.
struct CrossRatios {
    cplx chi_ab, chi_ba, inv_m;
};

namespace detail {

struct Basis {
    CrossRatios r;
    double quality;  // |den| / max|term|
};

inline Basis cross_jy(int n, cplx al, cplx be) {
    const Table ta = table(n, al), tb = table(n, be);
    const cplx fa = ta.j[n], ga = ta.y[n], fb = tb.j[n], gb = tb.y[n];
    const cplx dfa = deriv(ta.j, n), dga = deriv(ta.y, n);
    const cplx dfb = deriv(tb.j, n), dgb = deriv(tb.y, n);
    const cplx t1 = fa * gb, t2 = fb * ga;
    const cplx den = t1 - t2;
    Basis b;
    b.quality = std::abs(den) / std::max({std::abs(t1), std::abs(t2), 1e-300});
    b.r.chi_ab = be * (dfb * ga - fa * dgb) / den;
    b.r.chi_ba = al * (dfa * gb - fb * dga) / den;
    // m_H = -2i m_JY, m_JY = den * exp(s_a + s_b)
    const double lg = -(std::abs(al.imag()) + std::abs(be.imag()));
    b.r.inv_m = (0.5 * jj) * std::exp(lg) / den;
    return b;
}

inline Basis cross_h(int n, cplx al, cplx be) {
    const Table ta = table(n, al), tb = table(n, be);
    const cplx f_a = ta.h1[n], g_a = ta.h2[n], f_b = tb.h1[n], g_b = tb.h2[n];
    const cplx df_a = deriv(ta.h1, n), dg_a = deriv(ta.h2, n);
    const cplx df_b = deriv(tb.h1, n), dg_b = deriv(tb.h2, n);
    // Terms of kind A carry exp(i(al-be)), kind B carry exp(i(be-al)).
    const cplx la = jj * (al - be), lb = -la;
    const bool ref_a = la.real() >= lb.real();
    const cplx ref = ref_a ? la : lb;
    const cplx wa = std::exp(la - ref), wb = std::exp(lb - ref);
    const cplx t1 = f_a * g_b * wa, t2 = f_b * g_a * wb;
    const cplx den = t1 - t2;
    Basis b;
    b.quality = std::abs(den) / std::max({std::abs(t1), std::abs(t2), 1e-300});
    b.r.chi_ab = be * (df_b * g_a * wb - f_a * dg_b * wa) / den;
    b.r.chi_ba = al * (df_a * g_b * wa - f_b * dg_a * wb) / den;
    b.r.inv_m = std::exp(-ref) / den;
    return b;
}

}  // namespace detail

inline CrossRatios cross_ratios(int n, cplx al, cplx be) {
    detail::check_arg(al, n);
    detail::check_arg(be, n);
    if (al == cplx(0.0) || be == cplx(0.0)) throw NumericalError("specfun: kernel argument is zero");
    if (al == be) throw NumericalError("specfun: m_n(alpha, alpha) = 0, ratios undefined");
    detail::Basis h{}, jy{};
    bool have_h = false, have_jy = false;
    try { h = detail::cross_h(n, al, be); have_h = std::isfinite(h.quality); } catch (const NumericalError&) {}
    try { jy = detail::cross_jy(n, al, be); have_jy = std::isfinite(jy.quality); } catch (const NumericalError&) {}
    if (!have_h && !have_jy) throw NumericalError("specfun: hollow kernels not representable");
    const CrossRatios& r = (!have_jy || (have_h && h.quality >= jy.quality)) ? h.r : jy.r;
    auto finite = [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
    if (!finite(r.chi_ab) || !finite(r.chi_ba) || !finite(r.inv_m))
        throw NumericalError("specfun: hollow kernel ratio not finite");
    return r;
}

namespace detail {

struct KernelPair {
    Scaled m, chi;
    double q_m, q_chi;  // |difference| / max|term|, per kernel
};

// m_n and chi_n in the Hankel basis (exponential factors split off).
inline KernelPair kernels_h(int n, cplx al, cplx be) {
    const Table ta = table(n, al), tb = table(n, be);
    const cplx la = jj * (al - be), lb = -la;
    const cplx ref = la.real() >= lb.real() ? la : lb;
    const cplx wa = std::exp(la - ref), wb = std::exp(lb - ref);
    const cplx t1 = ta.h1[n] * tb.h2[n] * wa, t2 = tb.h1[n] * ta.h2[n] * wb;
    const cplx c1 = deriv(tb.h1, n) * ta.h2[n] * wb, c2 = ta.h1[n] * deriv(tb.h2, n) * wa;
    KernelPair k;
    k.m = {t1 - t2, ref};
    k.chi = {be * (c1 - c2), ref};
    k.q_m = std::abs(t1 - t2) / std::max({std::abs(t1), std::abs(t2), 1e-300});
    k.q_chi = std::abs(c1 - c2) / std::max({std::abs(c1), std::abs(c2), 1e-300});
    return k;
}

// Same kernels in the (J, Y) basis:
//   m_n = -2i [J(a) Y(b) - J(b) Y(a)],  chi_n = 2i b [J(a) Y'(b) - Y(a) J'(b)].
inline KernelPair kernels_jy(int n, cplx al, cplx be) {
    const Table ta = table(n, al), tb = table(n, be);
    const cplx ref = std::abs(al.imag()) + std::abs(be.imag());
    const cplx t1 = ta.j[n] * tb.y[n], t2 = tb.j[n] * ta.y[n];
    const cplx c1 = ta.j[n] * deriv(tb.y, n), c2 = ta.y[n] * deriv(tb.j, n);
    KernelPair k;
    k.m = {-2.0 * jj * (t1 - t2), ref};
    k.chi = {2.0 * jj * be * (c1 - c2), ref};
    k.q_m = std::abs(t1 - t2) / std::max({std::abs(t1), std::abs(t2), 1e-300});
    k.q_chi = std::abs(c1 - c2) / std::max({std::abs(c1), std::abs(c2), 1e-300});
    return k;
}

// Each kernel is taken from the basis in which its difference cancels least.
inline KernelPair kernels(int n, cplx al, cplx be) {
    check_arg(al, n);
    check_arg(be, n);
    KernelPair h{}, jy{};
    bool have_h = false, have_jy = false;
    try { h = kernels_h(n, al, be); have_h = std::isfinite(h.q_m + h.q_chi); } catch (const NumericalError&) {}
    try { jy = kernels_jy(n, al, be); have_jy = std::isfinite(jy.q_m + jy.q_chi); } catch (const NumericalError&) {}
    if (!have_h && !have_jy) throw NumericalError("specfun: hollow kernels not representable");
    if (!have_jy) return h;
    if (!have_h) return jy;
    KernelPair k;
    k.m = h.q_m >= jy.q_m ? h.m : jy.m;
    k.chi = h.q_chi >= jy.q_chi ? h.chi : jy.chi;
    k.q_m = std::max(h.q_m, jy.q_m);
    k.q_chi = std::max(h.q_chi, jy.q_chi);
    return k;
}

}  // namespace detail

// m_n(alpha, beta) = H1_n(alpha) H2_n(beta) - H1_n(beta) H2_n(alpha), scaled.
inline Scaled mn_kernel(int n, cplx al, cplx be) {
    detail::check_arg(al, n);
    detail::check_arg(be, n);
    if (al == be) return {0.0, 0.0};
    return detail::kernels(n, al, be).m;
}

// chi_n(alpha, beta) = beta [H1'_n(beta) H2_n(alpha) - H1_n(alpha) H2'_n(beta)], scaled.
inline Scaled chi_kernel(int n, cplx al, cplx be) { return detail::kernels(n, al, be).chi; }

// Modified Bessel functions via I_n(z) = i^n J_n(-iz), K_n(z) = (pi/2)(-i)^{n+1} H2_n(-iz).
// Scaled: I * exp(-|Re z|), K * exp(z).
inline cplx bessel_i(int n, cplx z, bool scaled = false) {
    const cplx w = -jj * z;
    const cplx v = std::pow(jj, n) * table(n, w, false).j[n];
    return scaled ? v : detail::unscale(v, std::abs(z.real()), "I");
}

inline cplx bessel_k(int n, cplx z, bool scaled = false) {
    if (z == cplx(0.0)) throw NumericalError("specfun: K_n pole at z = 0");
    const cplx w = -jj * z;
    const cplx v = 0.5 * pi * std::pow(-jj, n + 1) * table(n, w).h2[n];
    return scaled ? v : detail::unscale(v, -z, "K");
}

enum class Kind { I, K };

inline cplx modified_bessel(Kind kind, int n, cplx z, bool scaled = false) {
    return kind == Kind::I ? bessel_i(n, z, scaled) : bessel_k(n, z, scaled);
}

}  // namespace cableimp::specfun
