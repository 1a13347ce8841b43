#include "kslab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include <spdlog/spdlog.h>

namespace kslab {

const char* to_string(DataKind k) {
    switch (k) {
        case DataKind::Auto: return "auto";
        case DataKind::Subsolution: return "subsolution";
        case DataKind::Gaussian: return "gaussian";
    }
    return "auto";
}

const char* to_string(SweepMode m) {
    switch (m) {
        case SweepMode::Simulate: return "simulate";
        case SweepMode::Certify: return "certify";
        case SweepMode::Both: return "both";
    }
    return "both";
}

SweepMode sweep_mode_from(const std::string& s) {
    if (s == "simulate") return SweepMode::Simulate;
    if (s == "certify") return SweepMode::Certify;
    if (s == "both") return SweepMode::Both;
    throw ConfigError("unknown sweep mode: " + s);
}

const char* to_string(Observed o) {
    switch (o) {
        case Observed::BlowUp: return "blowup";
        case Observed::Bounded: return "bounded";
        case Observed::Undecided: return "undecided";
    }
    return "undecided";
}

CanonicalRun run_canonical(const ModelParams& p, const CanonicalConfig& cfg,
                           const std::function<void(const RadialState&)>& observer) {
    validate(p);
    const MassBounds& ms = cfg.masses;
    const Real target = cfg.target_mass ? *cfg.target_mass : (ms.M_lo + ms.M_hi) / 2;
    DataKind kind = cfg.data;
    if (kind == DataKind::Auto)
        kind = p.n >= 3 && regime_classify(p).has(Regime::Supercritical) ? DataKind::Subsolution : DataKind::Gaussian;

    CanonicalRun out;
    out.data = kind;
    RunControls c = cfg.controls;
    const Real ext = mass_extent(p);
    if (kind == DataKind::Subsolution) {
        const CertificateParams cp = ms.select(p);
        out.certificate = cp;
        const InitialData d = synthesize_initial_data(cp, target, ms.M_lo, ms.M_hi);
        c.horizon = std::min(c.horizon, cfg.blowup_horizon_multiplier * cp.T);
        c.s_min_rel = 1e-9L / (cp.y0 * ext);
        // collapse runs on time scales far below T
        if (!cfg.controls.dt_floor) c.dt_floor = std::numeric_limits<Real>::min() * 1e20L;
        const auto grid = make_grid(ext, c.N, c.s_min_rel * ext);
        Solver solver(p, c);
        out.outcome = solver.run(initial_state(p, grid, d.u, d.w), observer);
    } else {
        const InitialProfile bump = gaussian_bump(p, target, cfg.bump_width * p.R);
        const auto grid = make_grid(ext, c.N, c.s_min_rel * ext);
        Solver solver(p, c);
        out.outcome = solver.run(initial_state(p, grid, bump, bump), observer);
    }
    return out;
}

CertificateParams MassBounds::select(const ModelParams& p) const {
    SelectionOptions opt;
    opt.window_cap = window_cap;
    return select_parameters(p, M_lo, M_hi, Tstar, opt);
}

CanonicalConfig sweep_run_defaults() {
    CanonicalConfig c;
    c.controls.N = 256;
    c.controls.rtol = 1e-4L;
    c.controls.horizon = 10;
    return c;
}

void validate(const SweepConfig& s) {
    validate(s.base);
    if (s.base.n < 3) throw UnsupportedDimension("sweep needs n >= 3");
    if (s.m_count < 1 || s.sigma_count < 1) throw ConfigError("sweep counts must be >= 1");
    if (!(s.m_min <= s.m_max) || !(s.sigma_min <= s.sigma_max)) throw ConfigError("sweep ranges must be ordered");
    if (!(s.margin >= 0)) throw ConfigError("margin must be nonnegative");
    if (s.workers < 1) throw ConfigError("workers must be >= 1");
}

Real distance_to_diffusion_line(int n, Real m, Real sigma) {
    return std::abs(sigma - diffusion_line(n, m)) / std::sqrt(Real(2));
}

Real distance_to_sensitivity_line(int n, Real sigma) { return std::abs(sigma - sensitivity_line(n)); }

Classification classify_point(Real m, Real sigma, const SweepConfig& cfg) {
    Classification c;
    c.m = m;
    c.sigma = sigma;
    ModelParams p = cfg.base;
    p.m = m;
    p.sigma = sigma;
    c.labels = regime_classify(p);
    c.predicted = predict(c.labels);
    c.eligible = c.predicted != Prediction::None &&
                 distance_to_diffusion_line(p.n, m, sigma) >= cfg.margin &&
                 distance_to_sensitivity_line(p.n, sigma) >= cfg.margin;
    const bool super = c.labels.has(Regime::Supercritical);
    std::vector<std::string> notes;

    if (cfg.mode != SweepMode::Simulate && super) {
        try {
            const CertificateParams cp = cfg.run.masses.select(p);
            CertifyGrid g = cfg.cert;
            g.workers = 1;
            c.certificate_pass = certify(cp, p, g).pass;
            c.t_end = cp.T;
        } catch (const std::exception& e) {
            c.certificate_pass = false;
            notes.push_back(std::string("certificate: ") + e.what());
        }
    }
    if (cfg.mode != SweepMode::Certify) {
        try {
            const CanonicalRun run = run_canonical(p, cfg.run);
            c.simulation = run.outcome.kind;
            c.t_end = run.outcome.t_end;
            c.sup_u_final = run.outcome.series.empty() ? 0 : run.outcome.series.back().sup_u;
            if (!run.outcome.message.empty()) notes.push_back(run.outcome.message);
        } catch (const std::exception& e) {
            notes.push_back(std::string("simulation: ") + e.what());
        }
    }

    if (c.simulation == OutcomeKind::BlowUp) c.observed = Observed::BlowUp;
    else if (c.simulation == OutcomeKind::Bounded) c.observed = Observed::Bounded;
    else if (c.certificate_pass == true) c.observed = Observed::BlowUp;

    c.agrees = c.eligible && ((c.predicted == Prediction::BlowUp && c.observed == Observed::BlowUp) ||
                              (c.predicted == Prediction::NoBlowUp && c.observed == Observed::Bounded));
    for (const auto& n : notes) c.note += (c.note.empty() ? "" : "; ") + n;
    return c;
}

namespace {

Real axis(Real lo, Real hi, int count, int i) { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }

}  // namespace

int monotonicity_violations(const std::vector<Classification>& rows, int m_count, int sigma_count) {
    int bad = 0;
    for (int i = 0; i < m_count; ++i) {
        bool seen_blowup = false;
        for (int j = 0; j < sigma_count; ++j) {
            const Observed o = rows[i * sigma_count + j].observed;
            if (o == Observed::BlowUp) seen_blowup = true;
            else if (o == Observed::Bounded && seen_blowup) ++bad;
        }
    }
    return bad;
}

SweepResult run_sweep(const SweepConfig& cfg) {
    validate(cfg);
    const int total = cfg.m_count * cfg.sigma_count;
    SweepResult res;
    res.rows.resize(total);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k; (k = next++) < total;) {
            const int i = k / cfg.sigma_count, j = k % cfg.sigma_count;
            const Real m = axis(cfg.m_min, cfg.m_max, cfg.m_count, i);
            const Real s = axis(cfg.sigma_min, cfg.sigma_max, cfg.sigma_count, j);
            try {
                res.rows[k] = classify_point(m, s, cfg);
            } catch (const std::exception& e) {
                res.rows[k].m = m;
                res.rows[k].sigma = s;
                res.rows[k].note = e.what();
            }
            spdlog::info("sweep point m={} sigma={} -> {}", static_cast<double>(m), static_cast<double>(s),
                         to_string(res.rows[k].observed));
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < std::min(cfg.workers, total); ++w) pool.emplace_back(worker);
    }

    SweepSummary& sm = res.summary;
    sm.points = total;
    for (const auto& r : res.rows) {
        sm.eligible += r.eligible;
        sm.agreeing += r.agrees;
    }
    if (sm.eligible > 0) sm.agreement = Real(sm.agreeing) / sm.eligible;
    sm.monotonicity_violations = monotonicity_violations(res.rows, cfg.m_count, cfg.sigma_count);
    return res;
}

void write_phase_csv(std::ostream& os, const SweepResult& r) {
    os << kPhaseHeader << "\n";
    for (const auto& c : r.rows) {
        os << sci(c.m) << ',' << sci(c.sigma) << ',' << c.labels.to_string() << ','
           << (c.certificate_pass ? (*c.certificate_pass ? "true" : "false") : "") << ',' << to_string(c.observed)
           << ',' << sci(c.t_end) << ',' << sci(c.sup_u_final) << ',' << (c.eligible ? "true" : "false") << ','
           << (c.agrees ? "true" : "false") << "\n";
    }
}

void write_line_equations(std::ostream& os, int n) {
    os << "# critical lines in the (m, sigma) plane, n = " << n << "\n";
    os << "diffusion: sigma = m - 1 + 4/" << n << " = m + " << sci(Real(4) / n - 1) << "\n";
    os << "sensitivity: sigma = 2/" << n << " = " << sci(Real(2) / n) << "\n";
}

json summary_json(const SweepResult& r) {
    const auto& s = r.summary;
    json j;
    j["points"] = s.points;
    j["eligible"] = s.eligible;
    j["agreeing"] = s.agreeing;
    j["agreement"] = s.agreement ? to_json_real(*s.agreement) : json(nullptr);
    j["monotonicity_violations"] = s.monotonicity_violations;
    json notes = json::array();
    for (const auto& c : r.rows)
        if (!c.note.empty())
            notes.push_back({{"m", to_json_real(c.m)}, {"sigma", to_json_real(c.sigma)}, {"note", c.note}});
    j["notes"] = notes;
    return j;
}

}  // namespace kslab
