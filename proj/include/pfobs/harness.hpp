#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pfobs/barriers.hpp"
#include "pfobs/config.hpp"
#include "pfobs/diagnostics.hpp"
#include "pfobs/initial_data.hpp"
#include "pfobs/io.hpp"
#include "pfobs/solver.hpp"

namespace pfobs {

namespace fs = std::filesystem;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One simulation at a fixed eps, with checkpoint bookkeeping and barrier columns.
class Runner {
public:
    Runner(const RunConfig& cfg, double eps)
        : cfg_(cfg),
          eps_(eps),
          pot_(cfg.potential()),
          grid_(cfg.grid(eps)),
          warnings_(validate_for_eps(cfg, eps)),
          sim_(pot_, ForcingField(cfg.geometry, grid_, eps, cfg.enforce_boundary_collar),
               build_u0(grid_, cfg.initial_spec(eps), pot_, cfg.solver.cells_per_eps), cfg.dt(eps)),
          s0_(sim_.state()) {
        opt_.c4 = cfg.c4();
        opt_.density_stride = cfg.diagnostics.density_stride;
        const double rb = cfg.diagnostics.obstacle_ball_fraction * cfg.geometry.R0;
        for (const auto& k : cfg.geometry.obstacles_plus) add_barrier(k, BarrierKind::Sub);
        for (const auto& k : cfg.geometry.obstacles_minus) add_barrier(k, BarrierKind::Super);
        if (!barriers_.empty()) opt_.obstacle_ball = Ball{barriers_.front().y, rb};
        total_steps_ = cfg.solver.t_end > 0.0 ? std::llround(cfg.solver.t_end / sim_.dt()) : 0;
        if (cfg.solver.checkpoint_every > 0)
            every_ = cfg.solver.checkpoint_every;
        else
            every_ = std::max<long>(1, (total_steps_ + cfg.solver.checkpoints - 1) / cfg.solver.checkpoints);
    }

    double eps() const { return eps_; }
    double dt() const { return sim_.dt(); }
    const Grid& grid() const { return grid_; }
    const PhaseState& state() const { return sim_.state(); }
    const PhaseState& initial_state() const { return s0_; }
    const Simulation<QuarticPotential>& simulation() const { return sim_; }
    const QuarticPotential& potential() const { return pot_; }
    const std::vector<BarrierSpec>& barriers() const { return barriers_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    const DiagnosticsOptions& options() const { return opt_; }
    long total_steps() const { return total_steps_; }
    long checkpoint_every() const { return every_; }

    void advance(long n) { sim_.advance(n); }

    /// Steps to the next checkpoint (or to t_end); false once t_end is reached.
    bool advance_to_next_checkpoint() {
        const long done = sim_.steps_taken();
        if (done >= total_steps_) return false;
        sim_.advance(std::min(every_, total_steps_ - done));
        return true;
    }

    DiagnosticsRecord record() const {
        const PhaseState& s = sim_.state();
        DiagnosticsRecord r = compute_record(s, s0_, sim_.ut2_integral(), sim_.forcing(), pot_, opt_);
        double sub = kNaN, sup = kNaN, dev = kNaN;
        const double rb = cfg_.diagnostics.obstacle_ball_fraction * cfg_.geometry.R0;
        for (const auto& b : barriers_) {
            if (s.t >= b.t_start() * (1.0 - 1e-12)) {
                const double gap = comparison_gap(s, b, pot_);
                double& slot = b.kind == BarrierKind::Sub ? sub : sup;
                slot = std::isnan(slot) ? gap : std::min(slot, gap);
            }
            const double d = obstacle_deviation(s, b.y, rb, b.kind);
            dev = std::isnan(dev) ? d : std::max(dev, d);
        }
        r.min_gap_sub = sub;
        r.min_gap_super = sup;
        r.obstacle_dev = dev;
        return r;
    }

private:
    void add_barrier(const Disk& k, BarrierKind kind) {
        barriers_.push_back(make_barrier(k.center, kind, cfg_.geometry.R0, cfg_.geometry.delta, eps_, cfg_.beta_star,
                                         cfg_.c_star_star, pot_));
    }

    RunConfig cfg_;
    double eps_;
    QuarticPotential pot_;
    Grid grid_;
    std::vector<std::string> warnings_;
    Simulation<QuarticPotential> sim_;
    PhaseState s0_;
    DiagnosticsOptions opt_;
    std::vector<BarrierSpec> barriers_;
    long total_steps_ = 0;
    long every_ = 1;
};

struct RunOutput {
    double eps = 0.0;
    double dt = 0.0;
    long steps = 0;
    std::vector<DiagnosticsRecord> records;
    std::vector<std::string> warnings;
    bool failed = false;
    std::string error;
};

inline std::string snapshot_name(long step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%08ld.pfob", step);
    return buf;
}

inline void write_json(const fs::path& p, const json& j) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    os << j.dump(2) << '\n';
}

/// Runs one eps to t_end. With an empty out_dir nothing is written.
inline RunOutput run_single(const RunConfig& cfg, double eps, const std::string& out_dir) {
    RunOutput out;
    out.eps = eps;
    Runner rn(cfg, eps);
    out.dt = rn.dt();
    out.warnings = rn.warnings();
    std::optional<CsvWriter> csv;
    const fs::path dir(out_dir);
    if (!out_dir.empty()) {
        fs::create_directories(dir);
        json m = make_manifest(cfg, {eps});
        m["run"] = {{"eps", eps}, {"checkpoint_every", rn.checkpoint_every()}, {"warnings", rn.warnings()}};
        write_json(dir / "manifest.json", m);
        csv.emplace((dir / "diagnostics.csv").string());
    }
    auto emit = [&] {
        out.records.push_back(rn.record());
        if (csv) csv->write(out.records.back());
        if (!out_dir.empty() && cfg.diagnostics.snapshots)
            write_snapshot((dir / snapshot_name(rn.state().step_index)).string(), rn.state());
    };
    emit();
    while (rn.advance_to_next_checkpoint()) emit();
    out.steps = rn.simulation().steps_taken();
    return out;
}

/// Trapezoid rule over checkpoint times.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t n = 1; n < t.size(); ++n) s += 0.5 * (t[n] - t[n - 1]) * (y[n] + y[n - 1]);
    return s;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return kNaN;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = std::log(x[k]), b = std::log(y[k]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? kNaN : (n * sxy - sx * sy) / den;
}

/// Smallest C >= 0 with mu_t - C t non-increasing across the records.
inline double semidecreasing_constant(const std::vector<DiagnosticsRecord>& rs) {
    double c = 0.0;
    for (std::size_t n = 1; n < rs.size(); ++n) {
        const double dt = rs[n].t - rs[n - 1].t;
        if (dt > 0.0) c = std::max(c, (rs[n].mu_total - rs[n - 1].mu_total) / dt);
    }
    return c;
}

struct SweepRow {
    double eps = 0.0;
    bool failed = false;
    std::string error;
    std::vector<DiagnosticsRecord> records;
    double int_xi_abs = kNaN;
    double xi_sup_max = kNaN;
    double grad_sup_max = kNaN;
    double density_ratio_max = kNaN;
    double min_gap_sub = kNaN;
    double min_gap_super = kNaN;
    double semidecreasing_C = kNaN;
    double mu0 = kNaN;
    double mu_max = kNaN;

    const DiagnosticsRecord* terminal() const { return records.empty() ? nullptr : &records.back(); }
    double xi_sup_sqrt_eps() const { return xi_sup_max * std::sqrt(eps); }
    double mass_balance_rel() const {
        const auto* r = terminal();
        return r ? std::fabs(r->mass_balance_residual) / mu0 : kNaN;
    }
};

struct SweepSummary {
    std::vector<SweepRow> rows;
    double slope = kNaN;
    double c11_proxy_ratio = kNaN;
    double semidecreasing_ratio = kNaN;
    double density_ratio_max = kNaN;
    bool any_failed = false;
};

inline double fmin_nan(double a, double b) { return std::isnan(a) ? b : std::isnan(b) ? a : std::min(a, b); }

inline SweepRow summarize_run(double eps, std::vector<DiagnosticsRecord> recs) {
    SweepRow row;
    row.eps = eps;
    std::vector<double> t, xi;
    row.xi_sup_max = row.grad_sup_max = row.density_ratio_max = row.mu_max = 0.0;
    for (const auto& r : recs) {
        t.push_back(r.t);
        xi.push_back(r.xi_total_abs);
        row.xi_sup_max = std::max(row.xi_sup_max, r.xi_sup);
        row.grad_sup_max = std::max(row.grad_sup_max, r.grad_sup);
        row.density_ratio_max = std::max(row.density_ratio_max, r.density_ratio_max);
        row.mu_max = std::max(row.mu_max, r.mu_total);
        row.min_gap_sub = fmin_nan(row.min_gap_sub, r.min_gap_sub);
        row.min_gap_super = fmin_nan(row.min_gap_super, r.min_gap_super);
    }
    row.int_xi_abs = trapezoid(t, xi);
    row.semidecreasing_C = semidecreasing_constant(recs);
    if (!recs.empty()) row.mu0 = recs.front().mu_total;
    row.records = std::move(recs);
    return row;
}

inline SweepSummary finish_sweep(std::vector<SweepRow> rows) {
    SweepSummary s;
    std::vector<double> e, x;
    double pmin = std::numeric_limits<double>::infinity(), pmax = 0.0;
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    s.density_ratio_max = 0.0;
    for (const auto& r : rows) {
        if (r.failed) {
            s.any_failed = true;
            continue;
        }
        e.push_back(r.eps);
        x.push_back(r.int_xi_abs);
        pmin = std::min(pmin, r.xi_sup_sqrt_eps());
        pmax = std::max(pmax, r.xi_sup_sqrt_eps());
        cmin = std::min(cmin, r.semidecreasing_C);
        cmax = std::max(cmax, r.semidecreasing_C);
        s.density_ratio_max = std::max(s.density_ratio_max, r.density_ratio_max);
    }
    if (e.size() >= 2) {
        s.slope = loglog_slope(e, x);
        s.c11_proxy_ratio = pmax / pmin;
        s.semidecreasing_ratio = cmax == 0.0 ? 1.0 : cmin == 0.0 ? std::numeric_limits<double>::infinity() : cmax / cmin;
    }
    s.rows = std::move(rows);
    return s;
}

inline const char* kSweepCsvHeader =
    "eps,status,t_end,int_xi_abs,xi_sup_max,xi_sup_sqrt_eps,grad_sup_max,density_ratio_max,min_gap_sub,"
    "min_gap_super,obstacle_dev,obstacle_mass,obstacle_mass_log10,mass_balance_rel,mu0,mu_total,"
    "semidecreasing_C,interface_length,loglog_slope";

inline void write_sweep_csv(const fs::path& p, const SweepSummary& s) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    os << kSweepCsvHeader << '\n';
    for (const auto& r : s.rows) {
        const DiagnosticsRecord* t = r.failed ? nullptr : r.terminal();
        auto f = [](double x) { return fmt17(x); };
        os << f(r.eps) << ',' << (r.failed ? "failed" : "ok") << ',' << f(t ? t->t : kNaN) << ',' << f(r.int_xi_abs)
           << ',' << f(r.xi_sup_max) << ',' << f(r.xi_sup_sqrt_eps()) << ',' << f(r.grad_sup_max) << ','
           << f(r.density_ratio_max) << ',' << f(r.min_gap_sub) << ',' << f(r.min_gap_super) << ','
           << f(t ? t->obstacle_dev : kNaN) << ',' << f(t ? t->obstacle_mass : kNaN) << ','
           << f(t ? t->obstacle_mass_log10 : kNaN) << ',' << f(r.mass_balance_rel()) << ',' << f(r.mu0) << ','
           << f(t ? t->mu_total : kNaN) << ',' << f(r.semidecreasing_C) << ',' << f(t ? t->interface_length : kNaN)
           << ',' << f(s.slope) << '\n';
    }
}

inline std::string eps_dir_name(double eps) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "eps_%.6g", eps);
    return buf;
}

/// Runs every eps of the sweep on up to `threads` workers. Per-run failures are recorded, not thrown.
inline SweepSummary run_sweep(const RunConfig& cfg, const std::string& out_dir, int threads) {
    validate_sweep(cfg);
    const auto& eps = cfg.eps_list;
    std::vector<SweepRow> rows(eps.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t n; (n = next.fetch_add(1)) < eps.size();) {
            const std::string sub = out_dir.empty() ? std::string() : (fs::path(out_dir) / eps_dir_name(eps[n])).string();
            try {
                rows[n] = summarize_run(eps[n], run_single(cfg, eps[n], sub).records);
            } catch (const std::exception& e) {
                rows[n].eps = eps[n];
                rows[n].failed = true;
                rows[n].error = e.what();
            }
        }
    };
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(eps.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepSummary s = finish_sweep(std::move(rows));
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_sweep_csv(fs::path(out_dir) / "sweep.csv", s);
        json rows_j = json::array();
        for (const auto& r : s.rows) {
            json j = {{"eps", r.eps}, {"status", r.failed ? "failed" : "ok"}};
            if (r.failed) j["error"] = r.error;
            if (const auto* t = r.terminal(); t && !r.failed)
                j["terminal"] = {{"t", t->t},
                                 {"energy", t->energy},
                                 {"mu_total", t->mu_total},
                                 {"xi_total_abs", t->xi_total_abs},
                                 {"xi_sup", t->xi_sup},
                                 {"grad_sup", t->grad_sup},
                                 {"density_ratio_max", t->density_ratio_max},
                                 {"interface_length", t->interface_length},
                                 {"mass_balance_residual", t->mass_balance_residual},
                                 {"obstacle_mass_log10", t->obstacle_mass_log10},
                                 {"obstacle_dev", t->obstacle_dev}};
            rows_j.push_back(j);
        }
        auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
        json m = make_manifest(cfg, eps);
        m["summary"] = {{"loglog_slope", num(s.slope)},
                        {"c11_proxy_ratio", num(s.c11_proxy_ratio)},
                        {"semidecreasing_ratio", num(s.semidecreasing_ratio)},
                        {"density_ratio_max", num(s.density_ratio_max)},
                        {"rows", rows_j}};
        write_json(fs::path(out_dir) / "sweep_summary.json", m);
    }
    return s;
}

}  // namespace pfobs
