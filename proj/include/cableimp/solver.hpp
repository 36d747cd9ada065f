#pragma once

// MoM system with the surface admittance operator:
//   Z = [U^T (1 - j w mu_o Y_s G)^{-1} Y_s U]^{-1},  R = Re Z,  L = Im Z / w.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "greens.hpp"
#include "surfop.hpp"

namespace cableimp {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

// Reduction of a full P x P matrix to the loop form with conductor r as
// return: Z_ij - Z_ir - Z_rj + Z_rr, row/column r removed.
inline MatrixXcd reduce_to_reference(const MatrixXcd& Z, int r) {
    const int P = int(Z.rows());
    if (r < 0 || r >= P) throw GeometryError("reference index out of range");
    MatrixXcd out(P - 1, P - 1);
    for (int i = 0, ii = 0; i < P; ++i) {
        if (i == r) continue;
        for (int j = 0, jj2 = 0; j < P; ++j) {
            if (j == r) continue;
            out(ii, jj2++) = Z(i, j) - Z(i, r) - Z(r, j) + Z(r, r);
        }
        ++ii;
    }
    return out;
}

// Selection matrix U (M x P): ones at the n = 0 rows of every contour.
inline MatrixXcd current_map(const HarmonicLayout& L) {
    MatrixXcd U = MatrixXcd::Zero(L.size(), L.conductors());
    for (int i = 0; i < L.size(); ++i)
        if (L.rows[i].n == 0) U(i, L.rows[i].conductor) = 1.0;
    return U;
}

struct PulResult {
    double frequency = 0.0;  // Hz
    double omega = 0.0;
    MatrixXcd Z_full;        // P x P, implicit reference at infinity
    MatrixXcd Z;             // reduced to the resolved return (P-1 x P-1)
    MatrixXd R, L;           // from the reduced Z, Ohm/m and H/m
    std::vector<int> orders;
    int reference = -1;
    bool proximity = true;   // any N_p > 0
    double rcond = 0.0;
    bool refined = false;
};

inline constexpr double kRefineRcond = 1e-12;

inline PulResult solve_pul(const CableSystem& sys, const HarmonicLayout& L, const GreensMatrix& G, double f) {
    if (!(f > 0.0) || !std::isfinite(f)) throw NumericalError("solve_pul: frequency must be > 0");
    if (G.rows() != L.size() || G.cols() != L.size()) throw GeometryError("solve_pul: G does not match layout");
    const double w = 2.0 * pi * f;
    const int M = L.size();
    const SurfaceOperator Ys = assemble_Ys(sys, L, w);
    const MatrixXcd U = current_map(L);

    MatrixXcd A = MatrixXcd::Identity(M, M) - (jj * w * sys.medium.mu()) * Ys.apply(G);
    const MatrixXcd B = Ys.apply(U);
    Eigen::PartialPivLU<MatrixXcd> lu(A);
    const double rc = lu.rcond();
    if (!(rc > 0.0) || !std::isfinite(rc))
        throw NumericalError("solve_pul: singular MoM system at f = " + std::to_string(f) +
                             " Hz (rcond = " + std::to_string(rc) + ")");
    MatrixXcd X = lu.solve(B);
    bool refined = false;
    if (rc < kRefineRcond) {
        X += lu.solve(B - A * X);
        refined = true;
    }
    const MatrixXcd Yp = U.transpose() * X;
    Eigen::PartialPivLU<MatrixXcd> lup(Yp);
    if (!(lup.rcond() > 0.0)) throw NumericalError("solve_pul: singular conductor admittance matrix");
    PulResult r;
    r.frequency = f;
    r.omega = w;
    r.Z_full = lup.inverse();
    r.reference = sys.reference_index();
    r.Z = reduce_to_reference(r.Z_full, r.reference);
    r.R = r.Z.real();
    r.L = r.Z.imag() / w;
    r.orders = L.order;
    r.proximity = L.max_order() > 0;
    r.rcond = rc;
    r.refined = refined;
    for (int i = 0; i < r.Z.size(); ++i)
        if (!std::isfinite(std::abs(r.Z.data()[i]))) throw NumericalError("solve_pul: non-finite impedance");
    return r;
}

inline PulResult solve_pul(const CableSystem& sys, double f) {
    const HarmonicLayout L = make_layout(sys);
    return solve_pul(sys, L, assemble_G(sys, L), f);
}

// Z(N) - Z(0) on the reduced form, same return path in both runs.
inline MatrixXcd proximity_delta(const PulResult& with, const PulResult& without) {
    if (with.reference != without.reference || with.Z.rows() != without.Z.rows())
        throw GeometryError("proximity_delta: runs use different return configurations");
    if (with.frequency != without.frequency) throw GeometryError("proximity_delta: frequency mismatch");
    return with.Z - without.Z;
}

inline MatrixXcd proximity_delta(const CableSystem& sys, double f) {
    const PulResult a = solve_pul(sys, f);
    const PulResult b = solve_pul(with_order(sys, 0), f);
    return proximity_delta(a, b);
}

// Mode projections of a two-conductor (or P-conductor) matrix.
// Common mode: all conductors in parallel, per-conductor value (1/P) sum Z_pq.
inline cplx common_mode(const MatrixXcd& Z) { return Z.sum() / double(Z.rows()); }

// Loop mode of a symmetric pair: (Z11 + Z22 - 2 Z12)/2.
inline cplx loop_mode(const MatrixXcd& Z) {
    if (Z.rows() != 2 || Z.cols() != 2) throw GeometryError("loop_mode needs a 2 x 2 matrix");
    return 0.5 * (Z(0, 0) + Z(1, 1) - Z(0, 1) - Z(1, 0));
}

// Positive-sequence value of a 3 x 3 matrix.
inline cplx positive_sequence(const MatrixXcd& Z) {
    if (Z.rows() != 3) throw GeometryError("positive_sequence needs a 3 x 3 matrix");
    return (Z.trace() - (Z(0, 1) + Z(1, 2) + Z(0, 2) + Z(1, 0) + Z(2, 1) + Z(2, 0)) / 2.0) / 3.0;
}

struct SweepFailure {
    double frequency;
    std::string message;
};

struct SweepResult {
    std::vector<double> frequencies;            // input order
    std::vector<std::optional<PulResult>> results;
    std::vector<SweepFailure> failures;
    double g_seconds = 0.0;
    std::vector<double> solve_seconds;          // per frequency
    bool complete() const { return failures.empty(); }
};

// G assembled once, frequencies solved independently (in parallel when
// threads > 1); output order equals input order.
inline SweepResult sweep(const CableSystem& sys, const std::vector<double>& freqs, unsigned threads = 0) {
    SweepResult out;
    out.frequencies = freqs;
    out.results.resize(freqs.size());
    out.solve_seconds.assign(freqs.size(), 0.0);
    const HarmonicLayout L = make_layout(sys);
    const auto t0 = std::chrono::steady_clock::now();
    const GreensMatrix G = assemble_G(sys, L);
    out.g_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::string> errors(freqs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < freqs.size();) {
            const auto s = std::chrono::steady_clock::now();
            try {
                out.results[i] = solve_pul(sys, L, G, freqs[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
            out.solve_seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count();
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, unsigned(std::max<std::size_t>(1, freqs.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < freqs.size(); ++i)
        if (!out.results[i]) out.failures.push_back({freqs[i], errors[i]});
    return out;
}

}  // namespace cableimp
