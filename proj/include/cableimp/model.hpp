#pragma once

// Cable geometry / material data model, JSON ingestion and validation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "constants.hpp"
#include "errors.hpp"

namespace cableimp {

inline constexpr int kMaxHarmonicOrder = 16;

struct ConductorSpec {
    double x = 0.0, y = 0.0;      // m
    double outer_radius = 0.0;    // a_p, m
    double inner_radius = 0.0;    // ã_p, m; 0 for a solid conductor
    double sigma = 0.0;           // S/m
    double mu_r = 1.0;
    double eps_r = 1.0;
    int order = 0;                // N_p

    bool hollow() const { return inner_radius > 0.0; }
    cplx center() const { return {x, y}; }
    bool operator==(const ConductorSpec&) const = default;
};

struct Medium {
    double eps_r = 1.0;
    double mu_r = 1.0;
    double mu() const { return mu0 * mu_r; }
    double eps() const { return eps0 * eps_r; }
    bool operator==(const Medium&) const = default;
};

enum class GroundModel { None, InfiniteEarthAnalytic };

struct GroundSpec {
    GroundModel model = GroundModel::None;
    double sigma = 0.0;  // S/m
    bool operator==(const GroundSpec&) const = default;
};

struct ReferencePolicy {
    enum class Mode { Explicit, AutoTube } mode = Mode::AutoTube;
    int index = -1;            // explicit mode
    double radius = 10.0;      // auto tube outer radius, m
    double thickness = 1e-3;   // auto tube wall, m
    bool operator==(const ReferencePolicy&) const = default;
};

struct SweepSpec {
    double f_min = 1.0, f_max = 1e6;
    int points = 1;
    bool log = true;
    bool operator==(const SweepSpec&) const = default;
};

// Insulation layer for the shunt-admittance helper (not part of the series geometry).
struct ShuntLayer {
    double r_in = 0.0, r_out = 0.0, eps_r = 1.0;
    bool operator==(const ShuntLayer&) const = default;
};

// One coaxial cable: conductor indices ordered inner to outer and the
// insulation layers between them (any number of layers per gap).
struct ShuntCable {
    std::vector<int> conductors;
    std::vector<ShuntLayer> layers;
    bool operator==(const ShuntCable&) const = default;
};

struct CableSystem {
    std::vector<ConductorSpec> conductors;  // auto return tube, if any, is last
    Medium medium;
    GroundSpec ground;
    ReferencePolicy reference;
    std::optional<SweepSpec> sweep;
    int default_order = 0;
    std::vector<ShuntCable> shunt;

    std::size_t size() const { return conductors.size(); }
    bool auto_return() const { return reference.mode == ReferencePolicy::Mode::AutoTube; }
    // Number of conductors given by the user (excludes the auto tube).
    std::size_t user_count() const { return auto_return() ? conductors.size() - 1 : conductors.size(); }
    int reference_index() const {
        return auto_return() ? int(conductors.size()) - 1 : reference.index;
    }
    bool operator==(const CableSystem&) const = default;
};

struct Violation {
    int p = -1, q = -1;  // q = -1 for single-conductor rules
    std::string rule;
    std::string message;
};

namespace detail {

inline double rel_tol(double scale) { return 1e-12 * scale; }

inline void check_conductor(const ConductorSpec& c, int p, std::vector<Violation>& out) {
    auto add = [&](const char* rule, const std::string& msg) {
        out.push_back({p, -1, rule, "conductor " + std::to_string(p) + ": " + msg});
    };
    if (!(c.outer_radius > 0.0)) add("radius", "outer radius must be > 0");
    if (c.inner_radius < 0.0 || (c.hollow() && !(c.inner_radius < c.outer_radius)))
        add("radius", "inner radius must satisfy 0 < inner < outer");
    if (!(c.sigma > 0.0)) add("material", "conductivity must be > 0");
    if (!(c.mu_r > 0.0)) add("material", "mu_r must be > 0");
    if (!(c.eps_r >= 1.0)) add("material", "eps_r must be >= 1");
    if (c.order < 0 || c.order > kMaxHarmonicOrder)
        add("order", "harmonic order must be in [0, " + std::to_string(kMaxHarmonicOrder) + "]");
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) add("position", "non-finite center");
}

// True when conductor q lies inside the cavity of hollow conductor p.
inline bool inside_cavity(const ConductorSpec& p, const ConductorSpec& q) {
    if (!p.hollow()) return false;
    const double d = std::abs(p.center() - q.center());
    return d + q.outer_radius <= p.inner_radius + rel_tol(p.inner_radius);
}

}  // namespace detail

// All invariant violations; empty iff the system is valid.
inline std::vector<Violation> validate_geometry(const CableSystem& sys) {
    std::vector<Violation> out;
    const int P = int(sys.conductors.size());
    if (P == 0) out.push_back({-1, -1, "count", "system has no conductors"});
    for (int p = 0; p < P; ++p) detail::check_conductor(sys.conductors[p], p, out);
    for (int p = 0; p < P; ++p) {
        for (int q = p + 1; q < P; ++q) {
            const auto& a = sys.conductors[p];
            const auto& b = sys.conductors[q];
            if (detail::inside_cavity(a, b) || detail::inside_cavity(b, a)) continue;
            const double d = std::abs(a.center() - b.center());
            const double need = a.outer_radius + b.outer_radius;
            if (d < need - detail::rel_tol(need)) {
                std::ostringstream os;
                os << "conductors " << p << " and " << q << " overlap (distance " << d
                   << " m < " << need << " m)";
                out.push_back({p, q, "overlap", os.str()});
            }
        }
    }
    if (!sys.auto_return() && (sys.reference.index < 0 || sys.reference.index >= P))
        out.push_back({-1, -1, "reference", "explicit reference index out of range"});
    if (!(sys.medium.mu_r > 0.0) || !(sys.medium.eps_r >= 1.0))
        out.push_back({-1, -1, "medium", "medium needs mu_r > 0 and eps_r >= 1"});
    if (sys.ground.model != GroundModel::None && !(sys.ground.sigma > 0.0))
        out.push_back({-1, -1, "ground", "ground conductivity must be > 0"});
    return out;
}

inline void throw_if_invalid(const CableSystem& sys) {
    const auto v = validate_geometry(sys);
    if (v.empty()) return;
    std::string msg = "invalid geometry:";
    for (const auto& e : v) msg += "\n  " + e.message;
    throw GeometryError(msg);
}

// Auto return: tube of the given radius/wall, sigma of the first conductor,
// mu_r = eps_r = 1, harmonic order 0, centred on the bounding box of the
// user conductors.
inline ConductorSpec make_auto_tube(const std::vector<ConductorSpec>& user, const ReferencePolicy& ref) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& c : user) {
        xmin = std::min(xmin, c.x - c.outer_radius);
        xmax = std::max(xmax, c.x + c.outer_radius);
        ymin = std::min(ymin, c.y - c.outer_radius);
        ymax = std::max(ymax, c.y + c.outer_radius);
    }
    ConductorSpec t;
    t.x = 0.5 * (xmin + xmax);
    t.y = 0.5 * (ymin + ymax);
    t.outer_radius = ref.radius;
    t.inner_radius = ref.radius - ref.thickness;
    t.sigma = user.front().sigma;
    t.order = 0;
    return t;
}

// Builds a system from user conductors, appending the auto tube when needed.
inline CableSystem make_system(std::vector<ConductorSpec> user, ReferencePolicy ref = {},
                               Medium medium = {}, GroundSpec ground = {}) {
    if (user.empty()) throw GeometryError("system has no conductors");
    CableSystem sys;
    sys.medium = medium;
    sys.ground = ground;
    sys.reference = ref;
    if (ref.mode == ReferencePolicy::Mode::AutoTube) {
        if (!(ref.radius > ref.thickness && ref.thickness > 0.0))
            throw GeometryError("auto return tube needs radius > thickness > 0");
        user.push_back(make_auto_tube(user, ref));
    }
    sys.conductors = std::move(user);
    throw_if_invalid(sys);
    return sys;
}

// Same geometry with every user conductor at harmonic order n (tube stays at 0).
inline CableSystem with_order(CableSystem sys, int n) {
    for (std::size_t p = 0; p < sys.user_count(); ++p) sys.conductors[p].order = n;
    sys.default_order = n;
    throw_if_invalid(sys);
    return sys;
}

// ---- JSON ingestion ------------------------------------------------------

namespace detail {

using nlohmann::json;

inline double get_num(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    if (!j.at(key).is_number()) throw ParseError(where + ": '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline double get_num_or(const json& j, const char* key, double dflt, const std::string& where) {
    return j.contains(key) ? get_num(j, key, where) : dflt;
}

inline int get_int(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    if (!j.at(key).is_number_integer()) throw ParseError(where + ": '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

inline std::string get_str(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ParseError(where + ": '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) throw ParseError(where + ": unknown key '" + it.key() + "'");
    }
}

}  // namespace detail

inline SweepSpec parse_sweep_string(const std::string& spec) {
    // min:max:points:{log|linear}
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 4) throw ParseError("sweep spec must be min:max:points:{log|linear}");
    SweepSpec s;
    try {
        std::size_t pos = 0;
        s.f_min = std::stod(parts[0], &pos);
        if (pos != parts[0].size()) throw std::invalid_argument("x");
        s.f_max = std::stod(parts[1], &pos);
        if (pos != parts[1].size()) throw std::invalid_argument("x");
        s.points = std::stoi(parts[2], &pos);
        if (pos != parts[2].size()) throw std::invalid_argument("x");
    } catch (const std::logic_error&) {
        throw ParseError("sweep spec: bad number in '" + spec + "'");
    }
    if (parts[3] == "log") s.log = true;
    else if (parts[3] == "linear") s.log = false;
    else throw ParseError("sweep spacing must be 'log' or 'linear'");
    return s;
}

inline std::vector<double> frequencies(const SweepSpec& s) {
    if (!(s.f_min > 0.0) || !(s.f_max >= s.f_min) || s.points < 1)
        throw ParseError("sweep needs 0 < f_min <= f_max and points >= 1");
    std::vector<double> f(s.points);
    if (s.points == 1) {
        f[0] = s.f_min;
        return f;
    }
    for (int i = 0; i < s.points; ++i) {
        const double t = double(i) / (s.points - 1);
        f[i] = s.log ? std::exp(std::log(s.f_min) + t * (std::log(s.f_max) - std::log(s.f_min)))
                     : s.f_min + t * (s.f_max - s.f_min);
    }
    f.back() = s.f_max;
    return f;
}

inline CableSystem parse_system_json(const nlohmann::json& doc) {
    using detail::get_num;
    using detail::get_num_or;
    if (!doc.is_object()) throw ParseError("document must be a JSON object");
    detail::reject_unknown(doc, {"conductors", "medium", "ground", "reference", "sweep", "order", "shunt"}, "document");

    int global_order = 0;
    if (doc.contains("order")) global_order = detail::get_int(doc, "order", "document");

    if (!doc.contains("conductors") || !doc.at("conductors").is_array() || doc.at("conductors").empty())
        throw ParseError("'conductors' must be a non-empty array");
    std::vector<ConductorSpec> user;
    int idx = 0;
    for (const auto& jc : doc.at("conductors")) {
        const std::string where = "conductors[" + std::to_string(idx++) + "]";
        if (!jc.is_object()) throw ParseError(where + ": must be an object");
        detail::reject_unknown(jc, {"type", "x_m", "y_m", "outer_radius_m", "inner_radius_m", "sigma_S_per_m",
                                    "resistivity_ohm_m", "mu_r", "eps_r", "order"}, where);
        ConductorSpec c;
        const std::string type = detail::get_str(jc, "type", where);
        c.x = get_num(jc, "x_m", where);
        c.y = get_num(jc, "y_m", where);
        c.outer_radius = get_num(jc, "outer_radius_m", where);
        if (type == "hollow") {
            c.inner_radius = get_num(jc, "inner_radius_m", where);
            if (!(c.inner_radius > 0.0)) throw ParseError(where + ": hollow conductor needs inner_radius_m > 0");
        } else if (type == "solid") {
            if (jc.contains("inner_radius_m")) throw ParseError(where + ": solid conductor has no inner radius");
        } else {
            throw ParseError(where + ": type must be 'solid' or 'hollow'");
        }
        const bool has_sigma = jc.contains("sigma_S_per_m"), has_rho = jc.contains("resistivity_ohm_m");
        if (has_sigma == has_rho) throw ParseError(where + ": give exactly one of sigma_S_per_m, resistivity_ohm_m");
        if (has_sigma) c.sigma = get_num(jc, "sigma_S_per_m", where);
        else {
            const double rho = get_num(jc, "resistivity_ohm_m", where);
            if (!(rho > 0.0)) throw ParseError(where + ": resistivity must be > 0");
            c.sigma = 1.0 / rho;
        }
        c.mu_r = get_num_or(jc, "mu_r", 1.0, where);
        c.eps_r = get_num_or(jc, "eps_r", 1.0, where);
        c.order = jc.contains("order") ? detail::get_int(jc, "order", where) : global_order;
        user.push_back(c);
    }

    Medium medium;
    if (doc.contains("medium")) {
        const auto& jm = doc.at("medium");
        if (!jm.is_object()) throw ParseError("medium must be an object");
        detail::reject_unknown(jm, {"eps_r", "mu_r"}, "medium");
        medium.eps_r = get_num_or(jm, "eps_r", 1.0, "medium");
        medium.mu_r = get_num_or(jm, "mu_r", 1.0, "medium");
    }

    GroundSpec ground;
    if (doc.contains("ground")) {
        const auto& jg = doc.at("ground");
        if (!jg.is_object()) throw ParseError("ground must be an object");
        detail::reject_unknown(jg, {"model", "sigma_S_per_m", "resistivity_ohm_m"}, "ground");
        const std::string model = detail::get_str(jg, "model", "ground");
        if (model == "none") ground.model = GroundModel::None;
        else if (model == "infinite-earth-analytic" || model == "analytic") ground.model = GroundModel::InfiniteEarthAnalytic;
        else throw ParseError("ground.model must be 'none' or 'infinite-earth-analytic'");
        if (jg.contains("sigma_S_per_m")) ground.sigma = get_num(jg, "sigma_S_per_m", "ground");
        else if (jg.contains("resistivity_ohm_m")) ground.sigma = 1.0 / get_num(jg, "resistivity_ohm_m", "ground");
        if (ground.model != GroundModel::None && !(ground.sigma > 0.0))
            throw ParseError("ground: conductivity must be > 0");
    }

    ReferencePolicy ref;
    if (doc.contains("reference")) {
        const auto& jr = doc.at("reference");
        if (!jr.is_object()) throw ParseError("reference must be an object");
        detail::reject_unknown(jr, {"mode", "index", "radius_m", "thickness_m"}, "reference");
        const std::string mode = detail::get_str(jr, "mode", "reference");
        if (mode == "explicit") {
            ref.mode = ReferencePolicy::Mode::Explicit;
            ref.index = detail::get_int(jr, "index", "reference");
        } else if (mode == "auto_tube") {
            ref.mode = ReferencePolicy::Mode::AutoTube;
            ref.radius = get_num_or(jr, "radius_m", ref.radius, "reference");
            ref.thickness = get_num_or(jr, "thickness_m", ref.thickness, "reference");
        } else {
            throw ParseError("reference.mode must be 'explicit' or 'auto_tube'");
        }
    }

    std::optional<SweepSpec> sweep;
    if (doc.contains("sweep")) {
        const auto& js = doc.at("sweep");
        if (!js.is_object()) throw ParseError("sweep must be an object");
        detail::reject_unknown(js, {"f_min_hz", "f_max_hz", "points", "spacing"}, "sweep");
        SweepSpec s;
        s.f_min = get_num(js, "f_min_hz", "sweep");
        s.f_max = get_num(js, "f_max_hz", "sweep");
        s.points = detail::get_int(js, "points", "sweep");
        const std::string sp = js.contains("spacing") ? detail::get_str(js, "spacing", "sweep") : "log";
        if (sp != "log" && sp != "linear") throw ParseError("sweep.spacing must be 'log' or 'linear'");
        s.log = sp == "log";
        (void)frequencies(s);  // validates
        sweep = s;
    }

    std::vector<ShuntCable> shunt;
    if (doc.contains("shunt")) {
        if (!doc.at("shunt").is_array()) throw ParseError("shunt must be an array");
        int si = 0;
        for (const auto& jc : doc.at("shunt")) {
            const std::string where = "shunt[" + std::to_string(si++) + "]";
            if (!jc.is_object()) throw ParseError(where + ": must be an object");
            detail::reject_unknown(jc, {"conductors", "layers"}, where);
            ShuntCable sc;
            if (!jc.contains("conductors") || !jc.at("conductors").is_array())
                throw ParseError(where + ": 'conductors' must be an array");
            for (const auto& v : jc.at("conductors")) {
                if (!v.is_number_integer()) throw ParseError(where + ": conductor index must be an integer");
                const int k = v.get<int>();
                if (k < 0 || k >= int(user.size())) throw ParseError(where + ": conductor index out of range");
                sc.conductors.push_back(k);
            }
            if (!jc.contains("layers") || !jc.at("layers").is_array())
                throw ParseError(where + ": 'layers' must be an array");
            for (const auto& jl : jc.at("layers")) {
                if (!jl.is_object()) throw ParseError(where + ": layer must be an object");
                detail::reject_unknown(jl, {"r_in_m", "r_out_m", "eps_r"}, where);
                sc.layers.push_back({get_num(jl, "r_in_m", where), get_num(jl, "r_out_m", where),
                                     get_num_or(jl, "eps_r", 1.0, where)});
            }
            shunt.push_back(sc);
        }
    }

    CableSystem sys = make_system(std::move(user), ref, medium, ground);
    sys.sweep = sweep;
    sys.default_order = global_order;
    sys.shunt = std::move(shunt);
    return sys;
}

inline CableSystem parse_system(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("JSON syntax: ") + e.what());
    }
    return parse_system_json(doc);
}

// Inverse of parse_system (the auto tube is re-created from the policy).
inline nlohmann::json to_json(const CableSystem& sys) {
    nlohmann::json doc;
    doc["order"] = sys.default_order;
    nlohmann::json conds = nlohmann::json::array();
    for (std::size_t p = 0; p < sys.user_count(); ++p) {
        const auto& c = sys.conductors[p];
        nlohmann::json jc;
        jc["type"] = c.hollow() ? "hollow" : "solid";
        jc["x_m"] = c.x;
        jc["y_m"] = c.y;
        jc["outer_radius_m"] = c.outer_radius;
        if (c.hollow()) jc["inner_radius_m"] = c.inner_radius;
        jc["sigma_S_per_m"] = c.sigma;
        jc["mu_r"] = c.mu_r;
        jc["eps_r"] = c.eps_r;
        jc["order"] = c.order;
        conds.push_back(jc);
    }
    doc["conductors"] = conds;
    doc["medium"] = {{"eps_r", sys.medium.eps_r}, {"mu_r", sys.medium.mu_r}};
    if (sys.ground.model != GroundModel::None)
        doc["ground"] = {{"model", "infinite-earth-analytic"}, {"sigma_S_per_m", sys.ground.sigma}};
    if (sys.auto_return())
        doc["reference"] = {{"mode", "auto_tube"}, {"radius_m", sys.reference.radius},
                            {"thickness_m", sys.reference.thickness}};
    else
        doc["reference"] = {{"mode", "explicit"}, {"index", sys.reference.index}};
    if (sys.sweep)
        doc["sweep"] = {{"f_min_hz", sys.sweep->f_min}, {"f_max_hz", sys.sweep->f_max},
                        {"points", sys.sweep->points}, {"spacing", sys.sweep->log ? "log" : "linear"}};
    if (!sys.shunt.empty()) {
        nlohmann::json sh = nlohmann::json::array();
        for (const auto& sc : sys.shunt) {
            nlohmann::json layers = nlohmann::json::array();
            for (const auto& l : sc.layers)
                layers.push_back({{"r_in_m", l.r_in}, {"r_out_m", l.r_out}, {"eps_r", l.eps_r}});
            sh.push_back({{"conductors", sc.conductors}, {"layers", layers}});
        }
        doc["shunt"] = sh;
    }
    return doc;
}

}  // namespace cableimp
