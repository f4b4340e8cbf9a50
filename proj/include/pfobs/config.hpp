#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfobs/barriers.hpp"
#include "pfobs/errors.hpp"
#include "pfobs/geometry.hpp"
#include "pfobs/initial_data.hpp"
#include "pfobs/io.hpp"
#include "pfobs/potential.hpp"
#include "pfobs/solver.hpp"

#ifndef PFOBS_GIT_DESCRIBE
#define PFOBS_GIT_DESCRIBE "unknown"
#endif

namespace pfobs {

using json = nlohmann::json;

struct SolverSection {
    double eps = 0.04;
    double cells_per_eps = 5.0;
    double s_cfl = 0.4;
    double t_end = 0.1;
    long checkpoint_every = 0;  // steps; 0 spreads `checkpoints` evenly
    int checkpoints = 20;
};

struct DiagnosticsSection {
    int density_stride = 4;
    double obstacle_ball_fraction = 0.8;
    bool snapshots = true;
    double initial_density_bound = 1.05;
};

struct BarrierSection {
    bool enabled = true;
    double comparison_tol_abs = 1e-6;
    double comparison_C_disc = 0.0;
};

struct RunConfig {
    GeometryConfig geometry;
    bool enforce_boundary_collar = true;
    double potential_scale = 1.0;
    InterfaceM0 m0 = CircleM0{};
    double beta_star = 0.25;
    double c_star_star = 0.2;
    SolverSection solver;
    DiagnosticsSection diagnostics;
    BarrierSection barriers;
    std::vector<double> eps_list;
    std::string output_dir = "out";
    int threads = 1;

    InitialDataSpec initial_spec(double eps) const { return {m0, beta_star, c_star_star, eps}; }
    QuarticPotential potential() const { return QuarticPotential(potential_scale); }
    double c4() const { return effective_c4(geometry); }
    double c1() const {
        return geometry.obstacles_plus.empty() && geometry.obstacles_minus.empty() ? 0.0
                                                                                  : compute_c1(2, geometry.R0, geometry.delta);
    }
    Grid grid(double eps) const { return Grid::for_domain(geometry.domain, eps / solver.cells_per_eps); }
    double dt(double eps) const {
        const Grid g = grid(eps);
        return run_dt(solver.t_end, stable_dt(eps, g.h, potential(), solver.s_cfl));
    }
};

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

inline Point read_point(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Disk> read_disks(const json& j, const std::string& where) {
    std::vector<Disk> out;
    if (!j.is_array()) throw ConfigError(where + ": expected a list");
    for (const auto& d : j) {
        check_keys(d, where, {"center", "radius"});
        out.push_back({read_point(d.at("center"), where + ".center"), d.at("radius").get<double>()});
    }
    return out;
}

inline json disks_json(const std::vector<Disk>& ds) {
    json a = json::array();
    for (const auto& d : ds) a.push_back({{"center", {d.center.x, d.center.y}}, {"radius", d.radius}});
    return a;
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
    using namespace detail;
    RunConfig c;
    check_keys(j, "config",
               {"geometry", "potential", "initial_data", "solver", "diagnostics", "barriers", "sweep", "output_dir", "threads"});
    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        check_keys(g, "geometry",
                   {"domain", "obstacles_plus", "obstacles_minus", "R0", "R1", "delta", "c4", "enforce_boundary_collar"});
        if (g.contains("domain")) {
            const auto d = g["domain"].get<std::vector<double>>();
            if (d.size() != 4) throw ConfigError("geometry.domain: expected [x_min, x_max, y_min, y_max]");
            c.geometry.domain = {d[0], d[1], d[2], d[3]};
        }
        if (g.contains("obstacles_plus")) c.geometry.obstacles_plus = read_disks(g["obstacles_plus"], "geometry.obstacles_plus");
        if (g.contains("obstacles_minus"))
            c.geometry.obstacles_minus = read_disks(g["obstacles_minus"], "geometry.obstacles_minus");
        read(g, "R0", c.geometry.R0, "geometry");
        read(g, "R1", c.geometry.R1, "geometry");
        read(g, "delta", c.geometry.delta, "geometry");
        read(g, "c4", c.geometry.c4, "geometry");
        read(g, "enforce_boundary_collar", c.enforce_boundary_collar, "geometry");
    }
    if (j.contains("potential")) {
        const json& p = j["potential"];
        check_keys(p, "potential", {"kind", "scale"});
        if (p.contains("kind") && p["kind"].get<std::string>() != "quartic")
            throw ConfigError("potential.kind: only 'quartic' is supported");
        read(p, "scale", c.potential_scale, "potential");
    }
    if (j.contains("initial_data")) {
        const json& d = j["initial_data"];
        check_keys(d, "initial_data", {"m0", "beta_star", "c_star_star"});
        read(d, "beta_star", c.beta_star, "initial_data");
        read(d, "c_star_star", c.c_star_star, "initial_data");
        if (d.contains("m0")) {
            const json& m = d["m0"];
            const std::string type = m.value("type", "circle");
            if (type == "circle") {
                check_keys(m, "initial_data.m0", {"type", "center", "radius"});
                CircleM0 cm;
                if (m.contains("center")) cm.center = read_point(m["center"], "initial_data.m0.center");
                read(m, "radius", cm.radius, "initial_data.m0");
                c.m0 = cm;
            } else if (type == "segment") {
                check_keys(m, "initial_data.m0", {"type", "orientation", "position", "inside"});
                SegmentM0 sm;
                const std::string o = m.value("orientation", "vertical");
                if (o != "vertical" && o != "horizontal") throw ConfigError("initial_data.m0.orientation: vertical|horizontal");
                sm.vertical = o == "vertical";
                read(m, "position", sm.position, "initial_data.m0");
                const std::string in = m.value("inside", "positive");
                if (in != "positive" && in != "negative") throw ConfigError("initial_data.m0.inside: positive|negative");
                sm.inside_sign = in == "positive" ? 1 : -1;
                c.m0 = sm;
            } else {
                throw ConfigError("initial_data.m0.type: circle|segment");
            }
        }
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_keys(s, "solver", {"eps", "cells_per_eps", "s_cfl", "t_end", "checkpoint_every", "checkpoints", "scheme"});
        if (s.contains("scheme") && s["scheme"].get<std::string>() != "explicit-euler")
            throw ConfigError("solver.scheme: only 'explicit-euler' is supported");
        read(s, "eps", c.solver.eps, "solver");
        read(s, "cells_per_eps", c.solver.cells_per_eps, "solver");
        read(s, "s_cfl", c.solver.s_cfl, "solver");
        read(s, "t_end", c.solver.t_end, "solver");
        read(s, "checkpoint_every", c.solver.checkpoint_every, "solver");
        read(s, "checkpoints", c.solver.checkpoints, "solver");
    }
    if (j.contains("diagnostics")) {
        const json& d = j["diagnostics"];
        check_keys(d, "diagnostics", {"density_stride", "obstacle_ball_fraction", "snapshots", "initial_density_bound"});
        read(d, "density_stride", c.diagnostics.density_stride, "diagnostics");
        read(d, "obstacle_ball_fraction", c.diagnostics.obstacle_ball_fraction, "diagnostics");
        read(d, "snapshots", c.diagnostics.snapshots, "diagnostics");
        read(d, "initial_density_bound", c.diagnostics.initial_density_bound, "diagnostics");
    }
    if (j.contains("barriers")) {
        const json& b = j["barriers"];
        check_keys(b, "barriers", {"enabled", "comparison_tol_abs", "comparison_C_disc"});
        read(b, "enabled", c.barriers.enabled, "barriers");
        read(b, "comparison_tol_abs", c.barriers.comparison_tol_abs, "barriers");
        read(b, "comparison_C_disc", c.barriers.comparison_C_disc, "barriers");
    }
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        check_keys(s, "sweep", {"eps_list"});
        read(s, "eps_list", c.eps_list, "sweep");
    }
    read(j, "output_dir", c.output_dir, "config");
    read(j, "threads", c.threads, "config");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config not found: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

/// Effective configuration with every default spelled out.
inline json config_to_json(const RunConfig& c) {
    json m0;
    if (const auto* cm = std::get_if<CircleM0>(&c.m0))
        m0 = {{"type", "circle"}, {"center", {cm->center.x, cm->center.y}}, {"radius", cm->radius}};
    else {
        const auto& s = std::get<SegmentM0>(c.m0);
        m0 = {{"type", "segment"},
              {"orientation", s.vertical ? "vertical" : "horizontal"},
              {"position", s.position},
              {"inside", s.inside_sign > 0 ? "positive" : "negative"}};
    }
    const Rect& d = c.geometry.domain;
    return {
        {"geometry",
         {{"domain", {d.x_min, d.x_max, d.y_min, d.y_max}},
          {"obstacles_plus", detail::disks_json(c.geometry.obstacles_plus)},
          {"obstacles_minus", detail::disks_json(c.geometry.obstacles_minus)},
          {"R0", c.geometry.R0},
          {"R1", c.geometry.R1},
          {"delta", c.geometry.delta},
          {"c4", c.geometry.c4},
          {"enforce_boundary_collar", c.enforce_boundary_collar}}},
        {"potential", {{"kind", "quartic"}, {"scale", c.potential_scale}}},
        {"initial_data", {{"m0", m0}, {"beta_star", c.beta_star}, {"c_star_star", c.c_star_star}}},
        {"solver",
         {{"eps", c.solver.eps},
          {"cells_per_eps", c.solver.cells_per_eps},
          {"s_cfl", c.solver.s_cfl},
          {"t_end", c.solver.t_end},
          {"checkpoint_every", c.solver.checkpoint_every},
          {"checkpoints", c.solver.checkpoints},
          {"scheme", "explicit-euler"}}},
        {"diagnostics",
         {{"density_stride", c.diagnostics.density_stride},
          {"obstacle_ball_fraction", c.diagnostics.obstacle_ball_fraction},
          {"snapshots", c.diagnostics.snapshots},
          {"initial_density_bound", c.diagnostics.initial_density_bound}}},
        {"barriers",
         {{"enabled", c.barriers.enabled},
          {"comparison_tol_abs", c.barriers.comparison_tol_abs},
          {"comparison_C_disc", c.barriers.comparison_C_disc}}},
        {"sweep", {{"eps_list", c.eps_list}}},
        {"output_dir", c.output_dir},
        {"threads", c.threads},
    };
}

/// Cross-section checks for one eps; throws ConfigError naming the first violation.
/// Returns non-fatal warnings.
inline std::vector<std::string> validate_for_eps(const RunConfig& c, double eps) {
    std::vector<std::string> warn;
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("solver.eps must lie in (0, 1)");
    if (!(c.solver.cells_per_eps >= 5.0)) throw ConfigError("solver.cells_per_eps must be >= 5 (h <= eps/5)");
    if (!(c.solver.s_cfl > 0.0 && c.solver.s_cfl <= 1.0)) throw ConfigError("solver.s_cfl must lie in (0, 1]");
    if (!(c.solver.t_end >= 0.0)) throw ConfigError("solver.t_end must be >= 0");
    if (c.solver.checkpoint_every < 0) throw ConfigError("solver.checkpoint_every must be >= 0");
    if (c.solver.checkpoints < 1) throw ConfigError("solver.checkpoints must be >= 1");
    if (c.diagnostics.density_stride < 1) throw ConfigError("diagnostics.density_stride must be >= 1");
    if (!(c.diagnostics.obstacle_ball_fraction > 0.0 && c.diagnostics.obstacle_ball_fraction < 1.0))
        throw ConfigError("diagnostics.obstacle_ball_fraction must lie in (0, 1)");
    if (!(c.potential_scale > 0.0)) throw ConfigError("potential.scale must be positive");
    const Grid g = c.grid(eps);
    const Report a = validate_assumptions(c.geometry, c.m0);
    for (const auto& ch : a.checks)
        if (!ch.passed) throw ConfigError("geometry assumption failed: " + ch.name + " (measured " + std::to_string(ch.measured) + ")");
    for (const auto& m : forcing_band_violations(c.geometry, eps, true)) throw ConfigError(m);
    for (const auto& m : forcing_band_violations(c.geometry, eps, false)) {
        if (c.enforce_boundary_collar) throw ConfigError(m);
        warn.push_back(m);
    }
    validate_initial_spec(c.initial_spec(eps), c.geometry);
    if (!(c.c4() > 2.0 * g.h)) throw ConfigError("boundary collar c4 must exceed 2h for the density-ratio radii");
    const double pi = positivity_index(eps, g.h, c.dt(eps), c.potential(), c.c1());
    if (!(pi < 1.0)) throw ConfigError("time step breaks discrete positivity at eps = " + std::to_string(eps) + " (index " + std::to_string(pi) + ")");
    return warn;
}

inline std::vector<std::string> validate_sweep(const RunConfig& c) {
    if (c.eps_list.size() < 3) throw ConfigError("sweep.eps_list needs at least 3 entries");
    for (std::size_t n = 1; n < c.eps_list.size(); ++n)
        if (!(c.eps_list[n] < c.eps_list[n - 1])) throw ConfigError("sweep.eps_list must be strictly decreasing");
    std::vector<std::string> warn;
    for (double e : c.eps_list) {
        auto w = validate_for_eps(c, e);
        warn.insert(warn.end(), w.begin(), w.end());
    }
    return warn;
}

/// Config echo plus derived constants, versions and per-eps discretisation.
inline json make_manifest(const RunConfig& c, const std::vector<double>& eps_values) {
    json per = json::array();
    const auto pot = c.potential();
    for (double e : eps_values) {
        const Grid g = c.grid(e);
        const double dt = c.dt(e);
        const InitialDataSpec sp = c.initial_spec(e);
        per.push_back({{"eps", e},
                       {"nx", g.nx},
                       {"ny", g.ny},
                       {"h", g.h},
                       {"dt", dt},
                       {"stable_dt", stable_dt(e, g.h, pot, c.solver.s_cfl)},
                       {"steps", c.solver.t_end > 0.0 ? std::llround(c.solver.t_end / dt) : 0},
                       {"positivity_index", positivity_index(e, g.h, dt, pot, c.c1())},
                       {"clamp_scale", sp.clamp_scale()},
                       {"shrink", sp.shrink()},
                       {"blend_width", sp.blend_width()},
                       {"barrier_t_start", std::pow(e, c.beta_star)},
                       {"s_gamma_eps", s_gamma_eps(pot, e)}});
    }
    return {{"config", config_to_json(c)},
            {"derived",
             {{"c1", c.c1()},
              {"c2", kChiLipschitz * c.c1()},
              {"c4", c.c4()},
              {"sigma", sigma(pot)},
              {"alpha", pot.alpha()},
              {"beta", pot.beta()},
              {"gamma", pot.gamma()},
              {"M_W", pot.max_abs_d2W()},
              {"per_eps", per}}},
            {"tolerances",
             {{"max_principle_flag", 1e-12},
              {"comparison_tol_abs", c.barriers.comparison_tol_abs},
              {"comparison_C_disc", c.barriers.comparison_C_disc},
              {"density_radii", 8},
              {"density_stride", c.diagnostics.density_stride}}},
            {"versions",
             {{"git_describe", PFOBS_GIT_DESCRIBE},
              {"snapshot_format", "PFOB v" + std::to_string(kSnapshotVersion)},
              {"csv_header", kCsvHeader}}}};
}

}  // namespace pfobs
