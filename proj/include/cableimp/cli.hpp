#pragma once

// Command-line front end. run() is the whole program; tools/cableimp.cpp only
// forwards argv. Exit codes: 0 ok, 1 I/O, 2 parse, 3 geometry, 4 numerical,
// 5 partial sweep.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "filament.hpp"
#include "greens_quadrature.hpp"
#include "ground.hpp"
#include "modal.hpp"
#include "solver.hpp"

namespace cableimp {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kIoError = 1, kParseError = 2, kGeometryError = 3, kNumericalError = 4, kPartial = 5 };

namespace cli {

// 64-bit FNV-1a of the input bytes.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<double> parse_freq_list(const std::string& s) {
    std::vector<double> f;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw ParseError("--freqs: bad number '" + tok + "'");
        }
        if (used != tok.size()) throw ParseError("--freqs: bad number '" + tok + "'");
        if (!(v > 0.0) || !std::isfinite(v)) throw ParseError("--freqs: frequencies must be > 0");
        f.push_back(v);
    }
    if (f.empty()) throw ParseError("--freqs: empty list");
    return f;
}

struct Options {
    std::string input;
    std::optional<int> order;
    bool no_proximity = false;
    std::string ground;  // "", "none", "analytic"
    std::string sweep;
    std::string freqs;
    std::string oracle = "none";
    bool modes = false;
    std::string output = ".";
    bool ohm_per_km = false;
    unsigned threads = 0;
};

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& p) : out_(p), path_(p) {
        if (!out_) throw std::ios_base::failure("cannot open " + p.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    void comment(const std::string& s) { out_ << "# " << s << '\n'; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

// Conductor indices of the rows of PulResult::Z.
inline std::vector<int> reduced_labels(const CableSystem& sys) {
    std::vector<int> out;
    for (int p = 0; p < int(sys.size()); ++p)
        if (p != sys.reference_index()) out.push_back(p);
    return out;
}

inline std::string tag(int i, int j) { return std::to_string(i) + "_" + std::to_string(j); }

struct Run {
    const Options& opt;
    std::ostream& log;
    nlohmann::json manifest;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    std::filesystem::path dir;
    std::string header;  // first-line comment of every CSV

    CsvWriter open(const std::string& name) {
        CsvWriter w(dir / name);
        w.comment(header);
        files.push_back(name);
        return w;
    }
};

inline int execute(const Options& opt, std::ostream& log) {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    Run run{opt, log, {}, {}, {}, opt.output, {}};

    std::ifstream in(opt.input, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot read input file '" + opt.input + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    CableSystem sys = parse_system(text);

    if (opt.order) sys = with_order(sys, *opt.order);
    if (opt.no_proximity) sys = with_order(sys, 0);

    std::vector<double> freqs;
    if (!opt.freqs.empty()) {
        freqs = parse_freq_list(opt.freqs);
    } else if (!opt.sweep.empty()) {
        freqs = frequencies(parse_sweep_string(opt.sweep));
    } else if (sys.sweep) {
        freqs = frequencies(*sys.sweep);
    } else {
        throw ParseError("no frequencies: give --sweep, --freqs or a \"sweep\" block in the input");
    }

    const bool ground = opt.ground.empty() ? sys.ground.model == GroundModel::InfiniteEarthAnalytic
                                           : opt.ground == "analytic";
    if (ground && sys.ground.model != GroundModel::InfiniteEarthAnalytic)
        throw ParseError("--ground analytic needs a \"ground\" block with the earth conductivity");
    if (ground && !sys.auto_return())
        throw GeometryError("--ground analytic needs the auto return tube (reference mode auto_tube)");
    if (opt.modes && sys.shunt.empty()) throw ParseError("--modes needs a \"shunt\" block in the input");

    std::filesystem::create_directories(run.dir);
    const std::string hash = fnv1a_hex(text);
    run.header = "cableimp " + std::string(kVersion) + " input_fnv1a=" + hash + " manifest=manifest.json";

    // resolved defaults
    nlohmann::json& m = run.manifest;
    m["tool"] = "cableimp";
    m["version"] = kVersion;
    m["input"] = {{"path", opt.input}, {"fnv1a64", hash}};
    std::vector<int> orders;
    for (const auto& c : sys.conductors) orders.push_back(c.order);
    m["resolved"] = {{"orders", orders},
                     {"proximity", !opt.no_proximity},
                     {"reference", {{"mode", sys.auto_return() ? "auto_tube" : "explicit"},
                                    {"index", sys.reference_index()}}},
                     {"ground_model", ground ? "infinite-earth-analytic" : "none"},
                     {"oracle", opt.oracle},
                     {"units", opt.ohm_per_km ? "per_km" : "per_m"},
                     {"frequencies", freqs.size()}};
    if (sys.auto_return())
        m["resolved"]["auto_tube"] = {{"radius_m", sys.reference.radius},
                                      {"thickness_m", sys.reference.thickness},
                                      {"sigma_S_per_m", sys.conductors.back().sigma},
                                      {"mu_r", 1.0},
                                      {"eps_r", 1.0}};

    const double scale = opt.ohm_per_km ? 1e3 : 1.0;
    const std::string zu = opt.ohm_per_km ? "ohm_per_km" : "ohm_per_m";
    const std::string lu = opt.ohm_per_km ? "h_per_km" : "h_per_m";

    // impedance sweep
    const SweepResult sw = sweep(sys, freqs, opt.threads);
    m["timings"] = {{"g_assembly_s", sw.g_seconds}, {"per_frequency_solve_s", sw.solve_seconds}};
    const auto labels = reduced_labels(sys);
    const int K = int(labels.size());
    {
        CsvWriter w = run.open("results.csv");
        std::vector<std::string> h{"f_hz"};
        for (int i = 0; i < K; ++i)
            for (int j = i; j < K; ++j) h.push_back("R_" + tag(labels[i], labels[j]) + "_" + zu);
        for (int i = 0; i < K; ++i)
            for (int j = i; j < K; ++j) h.push_back("L_" + tag(labels[i], labels[j]) + "_" + lu);
        w.row(h);
        for (const auto& r : sw.results) {
            if (!r) continue;
            std::vector<std::string> row{num(r->frequency)};
            for (int i = 0; i < K; ++i)
                for (int j = i; j < K; ++j) row.push_back(num(r->R(i, j) * scale));
            for (int i = 0; i < K; ++i)
                for (int j = i; j < K; ++j) row.push_back(num(r->L(i, j) * scale));
            w.row(row);
        }
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : sw.failures) failures.push_back({{"f_hz", f.frequency}, {"error", f.message}});

    // ground: Z = Z_analytic + [Z(N) - Z(0)]
    std::vector<std::optional<MatrixXcd>> modal_Z(freqs.size());
    const int P = int(sys.user_count());
    if (ground) {
        const auto t0 = clock::now();
        const bool any_prox = make_layout(sys).max_order() > 0;
        SweepResult base;
        if (any_prox) base = sweep(with_order(sys, 0), freqs, opt.threads);
        CsvWriter w = run.open("combined.csv");
        std::vector<std::string> h{"f_hz"};
        for (int i = 0; i < P; ++i)
            for (int j = i; j < P; ++j) {
                h.push_back("Zre_" + tag(i, j) + "_" + zu);
                h.push_back("Zim_" + tag(i, j) + "_" + zu);
            }
        if (P == 2)
            for (const char* c : {"common_re_", "common_im_", "loop_re_", "loop_im_"}) h.push_back(c + zu);
        w.row(h);
        for (std::size_t k = 0; k < freqs.size(); ++k) {
            if (!sw.results[k] || (any_prox && !base.results[k])) {
                if (sw.results[k]) failures.push_back({{"f_hz", freqs[k]}, {"error", "N = 0 run failed"}});
                continue;
            }
            try {
                auto an = ground_analytic(sys, freqs[k]);
                for (auto& s : an.warnings) run.warnings.push_back(s);
                const MatrixXcd delta =
                    any_prox ? proximity_delta(*sw.results[k], *base.results[k]) : MatrixXcd::Zero(P, P);
                const MatrixXcd Z = combine_ground(an.Z, delta);
                modal_Z[k] = Z;
                std::vector<std::string> row{num(freqs[k])};
                for (int i = 0; i < P; ++i)
                    for (int j = i; j < P; ++j) {
                        row.push_back(num(Z(i, j).real() * scale));
                        row.push_back(num(Z(i, j).imag() * scale));
                    }
                if (P == 2) {
                    const cplx c = common_mode(Z) * scale, l = loop_mode(Z) * scale;
                    for (double v : {c.real(), c.imag(), l.real(), l.imag()}) row.push_back(num(v));
                }
                w.row(row);
            } catch (const std::exception& e) {
                failures.push_back({{"f_hz", freqs[k]}, {"error", e.what()}});
            }
        }
        m["timings"]["ground_s"] = std::chrono::duration<double>(clock::now() - t0).count();
    } else {
        for (std::size_t k = 0; k < freqs.size(); ++k)
            if (sw.results[k]) modal_Z[k] = sw.results[k]->Z;
    }

    // modal velocities
    if (opt.modes) {
        std::vector<MatrixXcd> Z, Y;
        std::vector<double> f;
        for (std::size_t k = 0; k < freqs.size(); ++k) {
            if (!modal_Z[k]) continue;
            Z.push_back(*modal_Z[k]);
            Y.push_back(coaxial_shunt_Y(sys, 2.0 * pi * freqs[k]));
            f.push_back(freqs[k]);
        }
        const auto mr = modal_velocities(Z, Y, f);
        CsvWriter w = run.open("modes.csv");
        const int n = Z.empty() ? 0 : int(Z[0].rows());
        std::vector<std::string> h{"f_hz"};
        for (int k = 0; k < n; ++k) h.push_back("v_" + std::to_string(k) + "_m_per_s");
        for (int k = 0; k < n; ++k) h.push_back("alpha_" + std::to_string(k) + "_np_per_m");
        h.push_back("ambiguous");
        h.push_back("defective");
        w.row(h);
        for (std::size_t k = 0; k < f.size(); ++k) {
            std::vector<std::string> row{num(f[k])};
            for (double v : mr.velocity[k]) row.push_back(num(v));
            for (double a : mr.attenuation[k]) row.push_back(num(a));
            row.push_back(mr.ambiguous[k] ? "1" : "0");
            row.push_back(mr.defective[k] ? "1" : "0");
            w.row(row);
            if (mr.ambiguous[k]) run.warnings.push_back("mode tracking ambiguous at f = " + num(f[k]) + " Hz");
            if (mr.defective[k]) run.warnings.push_back("defective eigenpair at f = " + num(f[k]) + " Hz");
        }
    }

    // oracles
    if (opt.oracle == "filament") {
        const auto t0 = clock::now();
        CsvWriter w = run.open("oracle_filament.csv");
        std::vector<std::string> h{"f_hz", "filaments"};
        for (int i = 0; i < P; ++i)
            for (int j = i; j < P; ++j)
                for (const char* q : {"R_mom_", "R_fil_", "R_relerr_", "L_mom_", "L_fil_", "L_relerr_"}) {
                    const std::string s = q;
                    const std::string unit = s.find("relerr") != std::string::npos ? "1"
                                             : s[0] == 'R'                         ? zu
                                                                                   : lu;
                    h.push_back(s + tag(i, j) + "_" + unit);
                }
        w.row(h);
        nlohmann::json worst = nlohmann::json::array();
        for (std::size_t k = 0; k < freqs.size(); ++k) {
            if (!sw.results[k]) continue;
            const double f = freqs[k], wv = 2.0 * pi * f;
            const auto mesh = build_mesh(sys, f);
            const MatrixXcd zf = filament_impedance(mesh, f);
            const MatrixXcd zm = sw.results[k]->Z_full.topLeftCorner(P, P);
            std::vector<std::string> row{num(f), std::to_string(mesh.count())};
            double e_max = 0.0;
            for (int i = 0; i < P; ++i)
                for (int j = i; j < P; ++j) {
                    const double rm = zm(i, j).real(), rf = zf(i, j).real();
                    const double lm = zm(i, j).imag() / wv, lf = zf(i, j).imag() / wv;
                    const double er = std::abs(rf - rm) / std::abs(rm), el = std::abs(lf - lm) / std::abs(lm);
                    e_max = std::max({e_max, er, el});
                    for (double v : {rm * scale, rf * scale, er, lm * scale, lf * scale, el}) row.push_back(num(v));
                }
            w.row(row);
            worst.push_back({{"f_hz", f}, {"max_relerr", e_max}, {"filaments", mesh.count()}});
        }
        m["oracle_filament"] = worst;
        m["timings"]["oracle_s"] = std::chrono::duration<double>(clock::now() - t0).count();
    } else if (opt.oracle == "quadrature-greens") {
        const auto t0 = clock::now();
        const auto L = make_layout(sys);
        const auto G = assemble_G(sys, L);
        CsvWriter w = run.open("oracle_greens.csv");
        w.row({"row", "col", "G_re", "G_im", "quad_re", "quad_im", "abs_err", "rel_err", "quad_err_estimate"});
        double worst = 0.0;
        for (int i = 0; i < L.size(); ++i)
            for (int j = 0; j < L.size(); ++j) {
                const auto q = greens_entry_quadrature({L.rows[i].center, L.rows[i].radius},
                                                       {L.rows[j].center, L.rows[j].radius}, L.rows[i].n,
                                                       L.rows[j].n);
                const double ae = std::abs(G(i, j) - q.value);
                const double re = std::abs(G(i, j)) > 0.0 ? ae / std::abs(G(i, j)) : ae;
                worst = std::max(worst, re);
                w.row({std::to_string(i), std::to_string(j), num(G(i, j).real()), num(G(i, j).imag()),
                       num(q.value.real()), num(q.value.imag()), num(ae), num(re), num(q.error)});
            }
        m["oracle_greens"] = {{"entries", L.size() * L.size()}, {"max_rel_err", worst}};
        m["timings"]["oracle_s"] = std::chrono::duration<double>(clock::now() - t0).count();
    }

    for (const auto& s : run.warnings) log << "warning: " << s << '\n';
    for (const auto& f : failures) log << "error: f = " << f["f_hz"].get<double>() << " Hz: " << f["error"].get<std::string>() << '\n';
    const int code = failures.empty() ? kOk : kPartial;
    m["failures"] = failures;
    m["warnings"] = run.warnings;
    m["files"] = run.files;
    m["exit_code"] = code;
    m["timings"]["total_s"] = std::chrono::duration<double>(clock::now() - t_start).count();
    std::ofstream mf(run.dir / "manifest.json");
    if (!mf) throw std::ios_base::failure("cannot write manifest.json");
    mf << m.dump(2) << '\n';
    return code;
}

}  // namespace cli

// args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    cli::Options opt;
    CLI::App app{"Per-unit-length series impedance of cable systems (MoM with surface admittance operator)",
                 "cableimp"};
    app.set_version_flag("--version", kVersion);
    app.add_option("--input", opt.input, "Geometry JSON file")->required();
    app.add_option("--order", opt.order, "Harmonic order for every conductor")
        ->check(CLI::Range(0, kMaxHarmonicOrder));
    app.add_flag("--no-proximity", opt.no_proximity, "Force order 0 (skin effect only)");
    app.add_option("--ground", opt.ground, "Earth return model")->check(CLI::IsMember({"none", "analytic"}));
    auto* sweep_opt = app.add_option("--sweep", opt.sweep, "min:max:points:{log|linear}");
    app.add_option("--freqs", opt.freqs, "Comma-separated frequencies in Hz")->excludes(sweep_opt);
    app.add_option("--oracle", opt.oracle, "Cross-check")
        ->check(CLI::IsMember({"none", "filament", "quadrature-greens"}));
    app.add_flag("--modes", opt.modes, "Modal velocities (needs a shunt block)");
    app.add_option("--output", opt.output, "Output directory");
    app.add_flag("--ohm-per-km", opt.ohm_per_km, "Report per km instead of per m");
    app.add_option("--threads", opt.threads, "Sweep worker threads (0 = all cores)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kParseError;
    }
    try {
        return cli::execute(opt, err);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseError;
    } catch (const GeometryError& e) {
        err << "geometry error: " << e.what() << '\n';
        return kGeometryError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    }
}

}  // namespace cableimp
