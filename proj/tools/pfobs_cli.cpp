// pfobs: obstacle-forced Allen-Cahn runs, sweeps and verification suites.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pfobs/pfobs.hpp"

namespace {

enum Exit { kOk = 0, kProperty = 1, kUsage = 2 };

struct Options {
    std::string config;
    std::string out;
    int threads = 0;
    long checkpoint_every = -1;
    std::string snapshot;
};

pfobs::RunConfig load(const Options& o) {
    pfobs::RunConfig c = o.config.empty() ? pfobs::RunConfig{} : pfobs::load_config(o.config);
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.threads > 0) c.threads = o.threads;
    if (o.checkpoint_every >= 0) c.solver.checkpoint_every = o.checkpoint_every;
    return c;
}

int print_report(const char* title, const pfobs::Report& r) {
    std::printf("%s\n", title);
    for (const auto& c : r.checks)
        std::printf("  [%s] %-32s measured=%-24s bound=%-24s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    pfobs::fmt17(c.measured).c_str(), pfobs::fmt17(c.bound).c_str(), c.note.c_str());
    std::printf("%s\n", r.passed() ? "all properties hold" : "property failure");
    return r.passed() ? kOk : kProperty;
}

int cmd_run(const Options& o) {
    const auto cfg = load(o);
    const auto out = pfobs::run_single(cfg, cfg.solver.eps, cfg.output_dir);
    for (const auto& w : out.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    const auto& t = out.records.back();
    std::printf("eps=%g dt=%.6g steps=%ld checkpoints=%zu\n", out.eps, out.dt, out.steps, out.records.size());
    std::printf("t=%g energy=%.10g mu=%.10g xi_abs=%.6g interface_length=%.6g\n", t.t, t.energy, t.mu_total,
                t.xi_total_abs, t.interface_length);
    std::printf("wrote %s\n", (std::filesystem::path(cfg.output_dir) / "diagnostics.csv").string().c_str());
    return kOk;
}

int cmd_sweep(const Options& o) {
    const auto cfg = load(o);
    for (const auto& w : pfobs::validate_sweep(cfg)) std::fprintf(stderr, "warning: %s\n", w.c_str());
    const auto s = pfobs::run_sweep(cfg, cfg.output_dir, cfg.threads);
    std::printf("%-10s %-7s %-14s %-14s %-14s\n", "eps", "status", "int_xi_abs", "xi_sup*sqrt", "D_max");
    for (const auto& r : s.rows) {
        std::printf("%-10g %-7s %-14.6g %-14.6g %-14.6g\n", r.eps, r.failed ? "failed" : "ok", r.int_xi_abs,
                    r.xi_sup_sqrt_eps(), r.density_ratio_max);
        if (r.failed) std::fprintf(stderr, "eps=%g: %s\n", r.eps, r.error.c_str());
    }
    std::printf("loglog slope %.6g\n", s.slope);
    std::printf("wrote %s\n", (std::filesystem::path(cfg.output_dir) / "sweep.csv").string().c_str());
    return s.any_failed ? kProperty : kOk;
}

int cmd_extract(const Options& o) {
    const pfobs::Snapshot s = pfobs::read_snapshot(o.snapshot);
    const pfobs::Interface itf = pfobs::extract_interface(s.u, s.grid());
    std::printf("t=%.17g eps=%.17g grid=%ux%u h=%.17g\n", s.t, s.eps, s.nx, s.ny, s.h);
    std::printf("curves=%zu length=%.17g\n", itf.lines.size(), itf.length);
    for (std::size_t n = 0; n < itf.lines.size(); ++n) {
        const auto& l = itf.lines[n];
        std::printf("curve %zu points=%zu closed=%d length=%.17g\n", n, l.points.size(), l.closed ? 1 : 0, l.length());
    }
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        const auto path = std::filesystem::path(o.out) / "interface.csv";
        std::FILE* f = std::fopen(path.string().c_str(), "w");
        if (!f) throw std::runtime_error("cannot open " + path.string());
        std::fprintf(f, "curve,closed,x,y\n");
        for (std::size_t n = 0; n < itf.lines.size(); ++n)
            for (const auto& p : itf.lines[n].points)
                std::fprintf(f, "%zu,%d,%.17g,%.17g\n", n, itf.lines[n].closed ? 1 : 0, p.x, p.y);
        std::fclose(f);
        std::printf("wrote %s\n", path.string().c_str());
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Allen-Cahn flow with obstacle forcing: runs, sweeps and checks"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", o.config, "run configuration (JSON)");
        sc->add_option("--out", o.out, "output directory");
        sc->add_option("--threads", o.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
        sc->add_option("--checkpoint-every", o.checkpoint_every, "steps between checkpoints")->check(CLI::NonNegativeNumber);
    };
    auto* run = app.add_subcommand("run", "single run at solver.eps");
    auto* sweep = app.add_subcommand("sweep", "runs every eps of sweep.eps_list");
    auto* vi = app.add_subcommand("verify-initial", "properties of the initial datum");
    auto* vb = app.add_subcommand("verify-barriers", "barrier identities, residual sign and comparison");
    auto* bc = app.add_subcommand("benchmark-circle", "shrinking circle without obstacles");
    auto* ex = app.add_subcommand("extract-interface", "zero level set of a snapshot");
    for (auto* sc : {run, sweep, vi, vb, bc, ex}) common(sc);
    ex->add_option("snapshot", o.snapshot, "snapshot file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*run) return cmd_run(o);
        if (*sweep) return cmd_sweep(o);
        if (*vi) return print_report("initial datum", pfobs::verify_initial(load(o)));
        if (*vb) return print_report("barriers", pfobs::verify_barriers(load(o)));
        if (*bc) return print_report("shrinking circle", pfobs::verify_circle(load(o)));
        if (*ex) return cmd_extract(o);
    } catch (const pfobs::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const pfobs::SnapshotError& e) {
        std::fprintf(stderr, "snapshot error: %s\n", e.what());
        return kUsage;
    } catch (const pfobs::MaxPrincipleViolation& e) {
        std::fprintf(stderr, "maximum principle violated: %s (cell %d,%d step %ld)\n", e.what(), e.i(), e.j(), e.step());
        return kProperty;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kProperty;
    }
    return kUsage;
}
