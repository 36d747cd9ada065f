#pragma once

// Modal post-processing: velocities from eig(Z Y) with continuity tracking,
// and the coaxial shunt admittance builder (per-gap C = 2 pi eps / ln(ro/ri)).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "model.hpp"
#include "solver.hpp"

namespace cableimp {

inline double layer_capacitance(const ShuntLayer& l) {
    if (!(0.0 < l.r_in && l.r_in < l.r_out)) throw GeometryError("shunt: layer radii must satisfy 0 < r_in < r_out");
    if (!(l.eps_r > 0.0)) throw GeometryError("shunt: layer eps_r must be > 0");
    return 2.0 * pi * eps0 * l.eps_r / std::log(l.r_out / l.r_in);
}

// Layers in series (strictly nested, contiguous or not).
inline double series_capacitance(std::vector<ShuntLayer> layers) {
    if (layers.empty()) throw GeometryError("shunt: no layers");
    std::sort(layers.begin(), layers.end(), [](const auto& a, const auto& b) { return a.r_in < b.r_in; });
    double inv = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (i > 0 && layers[i].r_in < layers[i - 1].r_out * (1.0 - 1e-12))
            throw GeometryError("shunt: layer radii are not nested");
        inv += 1.0 / layer_capacitance(layers[i]);
    }
    return 1.0 / inv;
}

// Maxwell potential-coefficient matrix (m/F) over the user conductors.
// Gap k of a cable lies between its conductor k and k+1; the last gap is
// between the outermost conductor and earth. Missing outer gap = grounded.
inline MatrixXd potential_coefficients(const CableSystem& sys) {
    const int P = int(sys.user_count());
    MatrixXd Pm = MatrixXd::Zero(P, P);
    std::vector<int> covered(P, 0);
    for (const auto& cab : sys.shunt) {
        const int K = int(cab.conductors.size());
        if (K == 0) throw GeometryError("shunt: cable without conductors");
        std::vector<std::vector<ShuntLayer>> gaps(K);
        for (const auto& l : cab.layers) {
            int g = -1;
            for (int k = 0; k < K; ++k)
                if (l.r_in >= sys.conductors[cab.conductors[k]].outer_radius * (1.0 - 1e-9)) g = k;
            if (g < 0) throw GeometryError("shunt: layer lies inside the innermost conductor");
            if (g + 1 < K && l.r_out > sys.conductors[cab.conductors[g + 1]].inner_radius * (1.0 + 1e-9))
                throw GeometryError("shunt: layer overlaps the next conductor");
            gaps[g].push_back(l);
        }
        std::vector<double> invc(K, 0.0);
        for (int k = 0; k < K; ++k) {
            if (gaps[k].empty()) {
                if (k + 1 < K) throw GeometryError("shunt: gap between nested conductors has no layer");
                continue;
            }
            invc[k] = 1.0 / series_capacitance(gaps[k]);
        }
        // phase potential = T diag(1/C) T^T with T(i,k) = 1 for k >= i
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) {
                double s = 0.0;
                for (int k = std::max(i, j); k < K; ++k) s += invc[k];
                Pm(cab.conductors[i], cab.conductors[j]) = s;
            }
        for (int c : cab.conductors) ++covered[c];
    }
    for (int p = 0; p < P; ++p)
        if (covered[p] != 1) throw GeometryError("shunt: conductor " + std::to_string(p) + " must belong to exactly one cable");
    return Pm;
}

// Shunt admittance on the same reduced basis as PulResult::Z.
inline MatrixXcd coaxial_shunt_Y(const CableSystem& sys, double w) {
    MatrixXd Pm = potential_coefficients(sys);
    if (!sys.auto_return()) Pm = reduce_to_reference(Pm.cast<cplx>(), sys.reference.index).real();
    Eigen::FullPivLU<MatrixXd> lu(Pm);
    if (!lu.isInvertible()) throw GeometryError("shunt: potential matrix is singular (grounded conductor?)");
    return (jj * w) * lu.inverse().cast<cplx>();
}

struct ModalResult {
    std::vector<double> frequencies;          // input order
    std::vector<std::vector<double>> velocity; // [freq][mode], tracked identity
    std::vector<std::vector<double>> attenuation;  // Np/m
    std::vector<bool> ambiguous;               // tracking ambiguity per frequency
    std::vector<bool> defective;               // eigen-residual check failed
};

namespace detail {

struct EigenData {
    Eigen::VectorXcd lambda;
    MatrixXcd V;  // unit columns
    bool defective = false;
};

inline EigenData modal_eigen(const MatrixXcd& Z, const MatrixXcd& Y) {
    const MatrixXcd A = Z * Y;
    Eigen::ComplexEigenSolver<MatrixXcd> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("modal: eigen-decomposition failed");
    EigenData d;
    d.lambda = es.eigenvalues();
    d.V = es.eigenvectors();
    for (int k = 0; k < d.V.cols(); ++k) d.V.col(k).normalize();
    const double res = (A * d.V - d.V * d.lambda.asDiagonal()).norm() / std::max(A.norm(), 1e-300);
    // defective pairs show up as nearly parallel eigenvectors
    const double cond = d.V.jacobiSvd().singularValues().tail(1)(0);
    d.defective = res > 1e-8 || cond < 1e-10;
    return d;
}

// Best assignment cur -> prev maximising total overlap.
inline std::vector<int> match(const MatrixXd& O, double& worst) {
    const int n = int(O.rows());
    std::vector<int> perm(n), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_score = -1.0;
    if (n <= 8) {
        do {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += O(i, perm[i]);
            if (s > best_score + 1e-14) {
                best_score = s;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        std::vector<bool> used(n, false);
        best.assign(n, -1);
        for (int i = 0; i < n; ++i) {
            int bj = -1;
            for (int j = 0; j < n; ++j)
                if (!used[j] && (bj < 0 || O(i, j) > O(i, bj))) bj = j;
            best[i] = bj;
            used[bj] = true;
        }
    }
    worst = 1.0;
    for (int i = 0; i < n; ++i) worst = std::min(worst, O(i, best[i]));
    return best;
}

}  // namespace detail

// Velocity per mode over frequency. Tracking always starts at the lowest
// frequency so mode identity does not depend on the order of the inputs.
inline ModalResult modal_velocities(const std::vector<MatrixXcd>& Z, const std::vector<MatrixXcd>& Y,
                                    const std::vector<double>& freqs) {
    const std::size_t F = freqs.size();
    if (Z.size() != F || Y.size() != F) throw GeometryError("modal: Z, Y and frequency grids differ");
    ModalResult out;
    out.frequencies = freqs;
    out.velocity.assign(F, {});
    out.attenuation.assign(F, {});
    out.ambiguous.assign(F, false);
    out.defective.assign(F, false);
    if (F == 0) return out;
    const int n = int(Z[0].rows());
    for (std::size_t i = 0; i < F; ++i)
        if (Z[i].rows() != n || Z[i].cols() != n || Y[i].rows() != n || Y[i].cols() != n)
            throw GeometryError("modal: Z and Y must be square and of equal size");

    std::vector<std::size_t> idx(F);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return freqs[a] < freqs[b]; });

    MatrixXcd prevV;
    for (std::size_t s = 0; s < F; ++s) {
        const std::size_t i = idx[s];
        const double w = 2.0 * pi * freqs[i];
        auto d = detail::modal_eigen(Z[i], Y[i]);
        std::vector<double> vel(n), att(n);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        auto gamma = [&](int k) {
            cplx g = std::sqrt(d.lambda(k));
            if (g.real() < 0.0) g = -g;
            return g;
        };
        if (s == 0) {
            // initial identity: descending velocity
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return w / gamma(a).imag() > w / gamma(b).imag();
            });
        } else {
            MatrixXd O(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) O(a, b) = std::abs(prevV.col(a).dot(d.V.col(b)));
            double worst = 1.0;
            order = detail::match(O, worst);
            out.ambiguous[i] = worst < 0.5;
        }
        MatrixXcd V(n, n);
        for (int k = 0; k < n; ++k) {
            const cplx g = gamma(order[k]);
            vel[k] = w / g.imag();
            att[k] = g.real();
            V.col(k) = d.V.col(order[k]);
        }
        prevV = V;
        out.velocity[i] = vel;
        out.attenuation[i] = att;
        out.defective[i] = d.defective;
    }
    return out;
}

}  // namespace cableimp
