#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kslab/config.hpp"
#include "kslab/report.hpp"

namespace fs = std::filesystem;
using namespace kslab;

namespace {

enum Exit { kOk = 0, kCertificateFail = 1, kConfigError = 2, kInternalError = 3 };

struct Options {
    std::string config;
    std::string out;
    int workers = 0;
    std::vector<std::string> tamper;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("kslab");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* v = std::getenv("KSLAB_LOG")) {
        const auto level = spdlog::level::from_str(v);
        // from_str maps unknown names to off; keep the default for those
        if (level != spdlog::level::off || std::string(v) == "off") spdlog::set_level(level);
    }
}

struct Context {
    RunConfig cfg;
    json provenance;
    fs::path out;
    int workers = 1;
};

Context prepare(const Options& o, const std::string& sub) {
    Context ctx;
    ctx.cfg = load_config(o.config);
    if (!o.out.empty()) ctx.cfg.out_dir = o.out;
    ctx.workers = o.workers > 0 ? o.workers : std::max(1u, std::thread::hardware_concurrency());
    ctx.provenance = to_json(ctx.cfg);
    ctx.out = ctx.cfg.out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + ctx.out.string() + ": " + ec.message());
    spdlog::info("{}: config {} -> {}", sub, o.config, ctx.out.string());
    return ctx;
}

std::ofstream open_out(const Context& ctx, const std::string& name) {
    std::ofstream f(ctx.out / name);
    if (!f) throw ConfigError("cannot write " + (ctx.out / name).string());
    return f;
}

void write_json(const Context& ctx, const std::string& sub, const std::string& name, json body) {
    body["provenance"] = {{"tool", "kslab"}, {"subcommand", sub}, {"config", ctx.provenance}};
    open_out(ctx, name) << body.dump(2) << "\n";
}

int cmd_certify(const Options& o) {
    Context ctx = prepare(o, "certify");
    const ModelParams& p = ctx.cfg.model;
    if (!regime_classify(p).has(Regime::Supercritical))
        throw UnsupportedRegime("certify needs the supercritical regime, got " + regime_classify(p).to_string());
    CertificateParams cp = require_masses(ctx.cfg).select(p);
    for (const auto& t : o.tamper) {
        apply_tamper(cp, t);
        spdlog::warn("tampered certificate: {}", t);
    }
    CertifyGrid grid = ctx.cfg.certify;
    grid.workers = ctx.workers;
    const CertificateReport rep = certify(cp, p, grid);
    json cert = to_json(cp);
    if (!o.tamper.empty()) cert["tampered"] = o.tamper;
    write_json(ctx, "certify", "certificate.json", cert);
    write_json(ctx, "certify", "certify_report.json", to_json(rep));
    if (ctx.cfg.dump_operator_csv) {
        auto f = open_out(ctx, "operators.csv");
        write_provenance(f, "certify", ctx.provenance);
        write_operator_csv(f, cp, p, 60, 60);
    }
    std::cout << "certify: " << (rep.pass ? "pass" : "fail") << " T=" << sci(cp.T) << " y0=" << sci(cp.y0) << "\n";
    for (const auto& f : rep.failures) std::cout << "  " << f << "\n";
    return rep.pass ? kOk : kCertificateFail;
}

int cmd_simulate(const Options& o) {
    Context ctx = prepare(o, "simulate");
    const RunConfig& cfg = ctx.cfg;
    CanonicalConfig run;
    if (cfg.masses) {
        run = canonical_from(cfg);
    } else {
        if (cfg.initial_kind == DataKind::Subsolution || !cfg.initial_mass)
            throw ConfigError("simulate needs a masses section unless initial.kind is gaussian with initial.mass");
        run.controls = cfg.solver;
        run.data = DataKind::Gaussian;
        run.bump_width = cfg.bump_width;
        run.target_mass = cfg.initial_mass;
    }
    const CanonicalRun res = run_canonical(cfg.model, run);
    {
        auto f = open_out(ctx, "series.csv");
        write_provenance(f, "simulate", ctx.provenance);
        write_series_csv(f, res.outcome.series, cfg.solver);
    }
    json outcome = to_json(res.outcome);
    outcome["initial_data"] = to_string(res.data);
    if (res.certificate) outcome["certificate"] = to_json(*res.certificate);
    write_json(ctx, "simulate", "outcome.json", outcome);
    if (cfg.snapshot) {
        auto f = open_out(ctx, "snapshot.csv");
        write_provenance(f, "simulate", ctx.provenance);
        write_snapshot_csv(f, res.outcome.final_state, cfg.model.n);
    }
    std::cout << "simulate: " << to_string(res.outcome.kind) << " t=" << sci(res.outcome.t_end) << " ("
              << res.outcome.message << ")\n";
    return res.outcome.kind == OutcomeKind::Error ? kInternalError : kOk;
}

int cmd_sweep(const Options& o) {
    Context ctx = prepare(o, "sweep");
    SweepConfig sw = ctx.cfg.sweep;
    sw.workers = ctx.workers;
    const SweepResult res = run_sweep(sw);
    {
        auto f = open_out(ctx, "phase.csv");
        write_provenance(f, "sweep", ctx.provenance);
        write_phase_csv(f, res);
    }
    {
        auto f = open_out(ctx, "phase_lines.txt");
        write_line_equations(f, sw.base.n);
    }
    write_json(ctx, "sweep", "sweep_summary.json", summary_json(res));
    const auto& s = res.summary;
    std::cout << "sweep: " << s.points << " points, " << s.eligible << " eligible, agreement "
              << (s.agreement ? sci(*s.agreement) : std::string("undefined")) << "\n";
    return kOk;
}

int cmd_masses(const Options& o) {
    Context ctx = prepare(o, "masses");
    const CertificateParams cp = require_masses(ctx.cfg).select(ctx.cfg.model);
    auto f = open_out(ctx, "masses.csv");
    write_provenance(f, "masses", ctx.provenance);
    write_mass_table_csv(f, cp, ctx.cfg.masses_table.points);
    std::cout << "masses: " << ctx.cfg.masses_table.points << " rows\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"kslab: finite-time blow-up certificates and radial simulations"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "output directory (overrides output.dir)");
    app.add_option("--workers", o.workers, "worker threads (default: logical cores)")->check(CLI::PositiveNumber);
    app.add_option("--tamper", o.tamper)->group("");

    int code = kOk;
    auto guarded = [&](int (*fn)(const Options&)) {
        return [&, fn] {
            try {
                code = fn(o);
            } catch (const ConfigError& e) {
                spdlog::error("configuration error: {}", e.what());
                code = kConfigError;
            } catch (const UnsupportedRegime& e) {
                spdlog::error("regime error: {}", e.what());
                code = kConfigError;
            } catch (const UnsupportedDimension& e) {
                spdlog::error("regime error: {}", e.what());
                code = kConfigError;
            } catch (const DomainError& e) {
                spdlog::error("configuration error: {}", e.what());
                code = kConfigError;
            } catch (const SelectionFailure& e) {
                spdlog::error("parameter selection failed: {}", e.what());
                code = kInternalError;
            } catch (const std::exception& e) {
                spdlog::error("internal error: {}", e.what());
                code = kInternalError;
            }
        };
    };
    app.add_subcommand("certify", "select blow-up parameters and verify the subsolution inequalities")
        ->callback(guarded(cmd_certify));
    app.add_subcommand("simulate", "integrate the radial system")->callback(guarded(cmd_simulate));
    app.add_subcommand("sweep", "classify a grid of (m, sigma) points")->callback(guarded(cmd_sweep));
    app.add_subcommand("masses", "tabulate the initial mass profiles")->callback(guarded(cmd_masses));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }
    return code;
}
