#pragma once

// Filament (conductor-partitioning) oracle: brute-force partial-inductance
// model used to validate the MoM results independently.
//
//   Z_f = diag(1/(sigma A_i)) + j w (mu0/2pi) ln(1/d_ij),  d_ii = e^{-1/4} r_eq
//   Z   = (B^T Z_f^{-1} B)^{-1}     (equal voltage drop per conductor)
//
// Tubes are tiled with the same sector count on every ring, so their self
// block is block-circulant and is inverted mode by mode with an FFT over the
// sector index. Solid rounds use a dense factorisation. Conductor-to-conductor
// blocks are compressed with adaptive cross approximation and folded in with
// the Woodbury identity.
//
// The result is the full P x P matrix over the user conductors with the same
// log-kernel reference (1 m) as PulResult::Z_full; the distant return tube is
// not meshed (it carries no current in that matrix).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "model.hpp"

namespace cableimp {

inline constexpr double kGmdFactor = 0.7788007830714049;  // e^{-1/4}

struct Filament {
    double x, y, area, r_eq;
};

struct ConductorMesh {
    int conductor = -1;
    bool circulant = false;   // tube: ring-major, `sectors` per ring
    int rings = 0, sectors = 0;
    std::vector<Filament> filaments;
    double sigma = 0.0;
    double area_exact = 0.0;
};

struct MeshOptions {
    double radial_per_skin_depth = 4.0;  // radial size <= delta / this
    double max_aspect = 2.0;             // arc length <= max_aspect * radial size
    std::size_t max_filaments = 400000;  // total budget
    std::size_t max_dense = 4000;        // largest dense (solid) self block
    double refine = 1.0;                 // all size bounds divided by this
};

struct FilamentMesh {
    std::vector<ConductorMesh> parts;
    double f_max = 0.0;
    std::size_t count() const {
        std::size_t n = 0;
        for (const auto& p : parts) n += p.filaments.size();
        return n;
    }
};

inline double skin_depth(double f, double mu, double sigma) { return std::sqrt(2.0 / (2.0 * pi * f * mu * sigma)); }

// Upper bound on the equal-area filament diameter at f_max.
inline double max_filament_diameter(const ConductorSpec& c, double f_max) {
    return std::min(0.5 * skin_depth(f_max, mu0 * c.mu_r, c.sigma), c.outer_radius / 6.0);
}

namespace detail {

inline void add_ring(ConductorMesh& m, double cx, double cy, double r0, double r1, int S) {
    const double dphi = 2.0 * pi / S;
    const double area = pi * (r1 * r1 - r0 * r0) / S;
    const double rc = (2.0 / 3.0) * (r1 * r1 * r1 - r0 * r0 * r0) / (r1 * r1 - r0 * r0) *
                      std::sin(0.5 * dphi) / (0.5 * dphi);
    for (int s = 0; s < S; ++s) {
        const double th = dphi * (s + 0.5);
        m.filaments.push_back({cx + rc * std::cos(th), cy + rc * std::sin(th), area, std::sqrt(area / pi)});
    }
}

inline int sectors_for(double r0, double r1, double h, double dmax, double aspect) {
    const int by_arc = int(std::ceil(2.0 * pi * r1 / (aspect * h)));
    const int by_area = int(std::ceil(4.0 * (r1 * r1 - r0 * r0) / (dmax * dmax)));
    return std::max({6, by_arc, by_area});
}

}  // namespace detail

inline FilamentMesh build_mesh(const CableSystem& sys, double f_max, const MeshOptions& opt = {}) {
    if (!(f_max > 0.0)) throw NumericalError("filament: f_max must be > 0");
    if (!(opt.refine >= 1.0)) throw GeometryError("filament: refine must be >= 1");
    auto over_budget = [&](double n, const char* qual) {
        return NumericalError("filament: mesh needs " + std::string(qual) + std::to_string(std::size_t(n)) +
                              " filaments, budget is " + std::to_string(opt.max_filaments));
    };
    // sizing pass: counts are checked before anything is allocated
    struct Plan {
        int R = 0, S = 0;
        double h = 0.0, dmax = 0.0;
        std::size_t count = 0;
    };
    std::vector<Plan> plans;
    double total = 0.0;
    for (std::size_t p = 0; p < sys.user_count(); ++p) {
        const auto& c = sys.conductors[p];
        if (c.mu_r != 1.0 || sys.medium.mu_r != 1.0)
            throw GeometryError("filament: only non-magnetic conductors and media are supported");
        const double delta = skin_depth(f_max, mu0 * c.mu_r, c.sigma);
        Plan pl;
        pl.dmax = max_filament_diameter(c, f_max) / opt.refine;
        const double hmax = std::min(delta / (opt.radial_per_skin_depth * opt.refine), pl.dmax);
        const double extent = c.hollow() ? c.outer_radius - c.inner_radius : c.outer_radius;
        const double step = c.hollow() ? hmax : std::min(hmax, 0.5 * pl.dmax);
        const double rings = std::max(1.0, std::ceil(extent / step));
        if (total + rings > double(opt.max_filaments)) throw over_budget(total + rings, "at least ");
        pl.R = int(rings);
        pl.h = extent / pl.R;
        if (c.hollow()) {
            const double arc = std::ceil(2.0 * pi * c.outer_radius / (opt.max_aspect * pl.h));
            const double area = std::ceil(4.0 * (c.outer_radius * c.outer_radius -
                                                 (c.outer_radius - pl.h) * (c.outer_radius - pl.h)) /
                                          (pl.dmax * pl.dmax));
            const double S = std::max({6.0, arc, area});
            if (total + rings * S > double(opt.max_filaments)) throw over_budget(total + rings * S, "");
            pl.S = detail::sectors_for(c.outer_radius - pl.h, c.outer_radius, pl.h, pl.dmax, opt.max_aspect);
            pl.count = std::size_t(pl.R) * std::size_t(pl.S);
        } else {
            pl.count = 1;
            for (int i = 1; i < pl.R; ++i)
                pl.count += detail::sectors_for(i * pl.h, (i + 1) * pl.h, pl.h, pl.dmax, opt.max_aspect);
            if (pl.count > opt.max_dense)
                throw NumericalError("filament: solid conductor " + std::to_string(p) + " needs " +
                                     std::to_string(pl.count) + " filaments, dense budget is " +
                                     std::to_string(opt.max_dense));
        }
        total += double(pl.count);
        plans.push_back(pl);
    }
    if (total > double(opt.max_filaments)) throw over_budget(total, "");

    FilamentMesh mesh;
    mesh.f_max = f_max;
    for (std::size_t p = 0; p < sys.user_count(); ++p) {
        const auto& c = sys.conductors[p];
        const Plan& pl = plans[p];
        ConductorMesh m;
        m.conductor = int(p);
        m.sigma = c.sigma;
        m.rings = pl.R;
        m.filaments.reserve(pl.count);
        const double h = pl.h;
        if (c.hollow()) {
            m.circulant = true;
            m.sectors = pl.S;
            for (int i = 0; i < pl.R; ++i)
                detail::add_ring(m, c.x, c.y, c.inner_radius + i * h, c.inner_radius + (i + 1) * h, pl.S);
            m.area_exact = pi * (c.outer_radius * c.outer_radius - c.inner_radius * c.inner_radius);
        } else {
            // centre disc of radius h (diameter <= dmax), then rings of width h
            m.filaments.push_back({c.x, c.y, pi * h * h, h});
            for (int i = 1; i < pl.R; ++i) {
                const double r0 = i * h, r1 = (i + 1) * h;
                detail::add_ring(m, c.x, c.y, r0, r1, detail::sectors_for(r0, r1, h, pl.dmax, opt.max_aspect));
            }
            m.area_exact = pi * c.outer_radius * c.outer_radius;
        }
        mesh.parts.push_back(std::move(m));
    }
    return mesh;
}

namespace detail {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline double log_inv_dist(const Filament& a, const Filament& b) {
    return -0.5 * std::log((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y));
}

inline double self_log(const Filament& a) { return -std::log(kGmdFactor * a.r_eq); }

// Applies the inverse of one conductor's self block Z_pp.
class SelfSolver {
public:
    SelfSolver(const ConductorMesh& m, double w) : m_(m) {
        const double kL = w * mu0 / (2.0 * pi);
        const auto& F = m.filaments;
        if (!m.circulant) {
            const int n = int(F.size());
            MatrixXcd Z(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double lg = (i == j) ? self_log(F[i]) : log_inv_dist(F[i], F[j]);
                    Z(i, j) = cplx(0.0, kL * lg);
                }
                Z(i, i) += 1.0 / (m.sigma * F[i].area);
            }
            lu_dense_.compute(Z);
            return;
        }
        const int R = m.rings, S = m.sectors;
        // first "row" of every ring pair: c_ij[s] = Z(ring i sector 0, ring j sector s)
        std::vector<std::vector<cplx>> chat(R * R);
        Eigen::FFT<double> fft;
        std::vector<cplx> c(S);
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < R; ++j) {
                for (int s = 0; s < S; ++s) {
                    const Filament& a = F[i * S];
                    const Filament& b = F[j * S + s];
                    const double lg = (i == j && s == 0) ? self_log(a) : log_inv_dist(a, b);
                    c[s] = cplx(0.0, kL * lg);
                }
                c[0] += (i == j) ? 1.0 / (m.sigma * F[i * S].area) : 0.0;
                fft.fwd(chat[i * R + j], c);
            }
        modes_.resize(S);
        MatrixXcd Ck(R, R);
        for (int k = 0; k < S; ++k) {
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < R; ++j) Ck(i, j) = chat[i * R + j][k];
            modes_[k].compute(Ck);
        }
    }

    MatrixXcd solve(const MatrixXcd& rhs) const {
        if (!m_.circulant) return lu_dense_.solve(rhs);
        const int R = m_.rings, S = m_.sectors;
        MatrixXcd out(rhs.rows(), rhs.cols());
        Eigen::FFT<double> fft;
        std::vector<cplx> buf(S), spec;
        // per column: FFT each ring, solve R x R per mode, inverse FFT
        std::vector<std::vector<cplx>> hat(R);
        for (int col = 0; col < rhs.cols(); ++col) {
            for (int i = 0; i < R; ++i) {
                for (int s = 0; s < S; ++s) buf[s] = rhs(i * S + s, col);
                fft.fwd(hat[i], buf);
            }
            VectorXcd v(R);
            for (int k = 0; k < S; ++k) {
                for (int i = 0; i < R; ++i) v(i) = hat[i][k];
                const VectorXcd x = modes_[k].solve(v);
                for (int i = 0; i < R; ++i) hat[i][k] = x(i);
            }
            for (int i = 0; i < R; ++i) {
                fft.inv(buf, hat[i]);
                for (int s = 0; s < S; ++s) out(i * S + s, col) = buf[s];
            }
        }
        return out;
    }

private:
    const ConductorMesh& m_;
    Eigen::PartialPivLU<MatrixXcd> lu_dense_;
    std::vector<Eigen::PartialPivLU<MatrixXcd>> modes_;
};

// Partially pivoted adaptive cross approximation of A(i,j) = ln(1/d_ij)
// between two filament sets: A ~ U V^T.
inline void aca(const std::vector<Filament>& a, const std::vector<Filament>& b, double tol, MatrixXd& U,
                MatrixXd& V) {
    const int n = int(a.size()), m = int(b.size());
    const int kmax = std::min({n, m, 1500});
    std::vector<VectorXd> us, vs;
    std::vector<char> row_used(n, 0);
    double norm2 = 0.0;
    int i = 0;
    for (int k = 0; k < kmax; ++k) {
        VectorXd row(m);
        for (int j = 0; j < m; ++j) row(j) = log_inv_dist(a[i], b[j]);
        for (std::size_t r = 0; r < us.size(); ++r) row -= us[r](i) * vs[r];
        row_used[i] = 1;
        Eigen::Index jstar;
        const double piv = row.cwiseAbs().maxCoeff(&jstar);
        if (piv < 1e-300) {
            // zero residual row: try another unused row
            int next = -1;
            for (int t = 0; t < n; ++t)
                if (!row_used[t]) { next = t; break; }
            if (next < 0) break;
            i = next;
            continue;
        }
        const VectorXd v = row / row(jstar);
        VectorXd u(n);
        for (int t = 0; t < n; ++t) u(t) = log_inv_dist(a[t], b[jstar]);
        for (std::size_t r = 0; r < us.size(); ++r) u -= vs[r](jstar) * us[r];
        // update Frobenius norm estimate of the approximant
        double cross = 0.0;
        for (std::size_t r = 0; r < us.size(); ++r) cross += us[r].dot(u) * vs[r].dot(v);
        const double uv = u.squaredNorm() * v.squaredNorm();
        norm2 += 2.0 * cross + uv;
        us.push_back(u);
        vs.push_back(v);
        if (std::sqrt(uv) <= tol * std::sqrt(std::max(norm2, 1e-300))) break;
        // next row: largest |u| among unused rows
        double best = -1.0;
        int bi = -1;
        for (int t = 0; t < n; ++t)
            if (!row_used[t] && std::abs(u(t)) > best) { best = std::abs(u(t)); bi = t; }
        if (bi < 0) break;
        i = bi;
    }
    U.resize(n, Eigen::Index(us.size()));
    V.resize(m, Eigen::Index(vs.size()));
    for (std::size_t r = 0; r < us.size(); ++r) {
        U.col(Eigen::Index(r)) = us[r];
        V.col(Eigen::Index(r)) = vs[r];
    }
    // sampled check of the approximation
    double err = 0.0, ref = 0.0;
    for (int s = 0; s < 64; ++s) {
        const int ii = int((s * 7919LL) % n), jj2 = int((s * 104729LL + 13) % m);
        const double exact = log_inv_dist(a[ii], b[jj2]);
        err = std::max(err, std::abs(exact - U.row(ii).dot(V.row(jj2))));
        ref = std::max(ref, std::abs(exact));
    }
    if (err > 1e3 * tol * std::max(ref, 1.0))
        throw NumericalError("filament: low-rank compression of a mutual block failed (sampled error " +
                             std::to_string(err) + ")");
}

}  // namespace detail

struct FilamentStats {
    std::size_t filaments = 0;
    std::vector<int> ranks;  // per conductor pair
};

// Full P x P impedance of the user conductors (Ohm/m).
inline Eigen::MatrixXcd filament_impedance(const FilamentMesh& mesh, double f, FilamentStats* stats = nullptr,
                                           double aca_tol = 1e-10) {
    using namespace detail;
    if (!(f > 0.0)) throw NumericalError("filament: frequency must be > 0");
    const double w = 2.0 * pi * f;
    const double kL = w * mu0 / (2.0 * pi);
    const int P = int(mesh.parts.size());

    std::vector<SelfSolver> self;
    self.reserve(P);
    for (const auto& m : mesh.parts) self.emplace_back(m, w);

    // low-rank mutual blocks; F_p collects the columns that live on conductor p
    struct Col { int part; int local; };
    std::vector<MatrixXd> Fp(P);
    std::vector<std::vector<int>> gidx(P);  // global column id of each local column
    int ncols = 0;
    std::vector<std::pair<int, int>> swaps;  // (global u col, global v col)
    std::vector<int> ranks;
    for (int p = 0; p < P; ++p)
        for (int q = p + 1; q < P; ++q) {
            MatrixXd U, V;
            aca(mesh.parts[p].filaments, mesh.parts[q].filaments, aca_tol, U, V);
            const int r = int(U.cols());
            ranks.push_back(r);
            auto append = [&](int part, const MatrixXd& X) {
                MatrixXd& T = Fp[part];
                MatrixXd N(X.rows(), T.cols() + X.cols());
                if (T.cols() > 0) N.leftCols(T.cols()) = T;
                N.rightCols(X.cols()) = X;
                T = std::move(N);
            };
            append(p, U);
            append(q, V);
            for (int k = 0; k < r; ++k) {
                gidx[p].push_back(ncols + k);
                gidx[q].push_back(ncols + r + k);
                swaps.push_back({ncols + k, ncols + r + k});
            }
            ncols += 2 * r;
        }

    // D^{-1} applied to the bundle indicator and to F_p, conductor by conductor
    MatrixXcd Ybus = MatrixXcd::Zero(P, P);
    MatrixXcd S = MatrixXcd::Zero(ncols, ncols);
    MatrixXcd FtDB = MatrixXcd::Zero(ncols, P);
    MatrixXcd BtDF = MatrixXcd::Zero(P, ncols);
    for (int p = 0; p < P; ++p) {
        const int n = int(mesh.parts[p].filaments.size());
        const int c = int(Fp[p].cols());
        MatrixXcd rhs(n, 1 + c);
        rhs.col(0).setOnes();
        if (c > 0) rhs.rightCols(c) = Fp[p].cast<cplx>();
        const MatrixXcd sol = self[p].solve(rhs);
        Ybus(p, p) = sol.col(0).sum();
        for (int a = 0; a < c; ++a) {
            const int ga = gidx[p][a];
            FtDB(ga, p) = Fp[p].col(a).cast<cplx>().dot(sol.col(0));
            BtDF(p, ga) = sol.col(1 + a).sum();
            for (int b = 0; b < c; ++b) S(ga, gidx[p][b]) += Fp[p].col(a).cast<cplx>().dot(sol.col(1 + b));
        }
    }
    if (ncols > 0) {
        // (D + F C F^T)^{-1}, C = j w (mu0/2pi) K, K = pairwise swap (K^{-1} = K)
        const cplx cinv = 1.0 / cplx(0.0, kL);
        for (const auto& [u, v] : swaps) {
            S(u, v) += cinv;
            S(v, u) += cinv;
        }
        Eigen::PartialPivLU<MatrixXcd> lu(S);
        Ybus -= BtDF * lu.solve(FtDB);
    }
    if (stats) {
        stats->filaments = mesh.count();
        stats->ranks = ranks;
    }
    Eigen::PartialPivLU<MatrixXcd> lub(Ybus);
    if (!(lub.rcond() > 0.0)) throw NumericalError("filament: singular bundle admittance");
    Eigen::MatrixXcd Z = lub.inverse();
    return 0.5 * (Z + Z.transpose()).eval();
}

}  // namespace cableimp
