// Acceptance runner: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; the exit status is nonzero if any run fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "kslab/config.hpp"
#include "kslab/mass_ode.hpp"
#include "support/mms.hpp"

using namespace kslab;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double d(Real x) { return static_cast<double>(x); }

ModelParams model(int n, Real m, Real sigma) {
    ModelParams p;
    p.n = n;
    p.m = m;
    p.sigma = sigma;
    return p;
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string format(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------

Verdict certificate_suite() {
    const std::vector<std::tuple<int, Real, Real>> cases{{3, 1, 2}, {3, 0, 1.5L}, {4, 1, 2}, {5, 0.5L, 1.5L}, {3, -1, 1}};
    Verdict v{true, ""};
    for (auto [n, m, sg] : cases) {
        const auto t0 = Clock::now();
        std::string status;
        try {
            const ModelParams p = model(n, m, sg);
            const CertificateParams cp = select_parameters(p, 1, 2, 1e6L);
            CertifyGrid g;  // 300 x 300, single worker
            const CertificateReport r = certify(cp, p, g);
            const double secs = since(t0);
            const bool ok = r.pass && secs < 30;
            v.pass = v.pass && ok;
            status = format("%s %.1fs maxP/scale=%.2e", r.pass ? "pass" : "fail", secs,
                            d(std::max(r.P_inner.ratio, r.P_outer.ratio)));
        } catch (const std::exception& e) {
            v.pass = false;
            status = std::string("error ") + e.what();
        }
        v.detail += format("(%d,%g,%g) %s; ", n, d(m), d(sg), status.c_str());
    }
    return v;
}

Verdict closed_forms() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 1);
    double worst_kink = 0, worst_ode = 0;
    int order_bad = 0, samples = 0, models = 0;
    while (samples < 100) {
        const int n = 3 + static_cast<int>(u(rng) * 3);
        const Real m = -1 + 3 * u(rng);
        const Real lo = std::max(diffusion_line(n, m), sensitivity_line(n));
        const Real sg = lo + 0.15L + 1.5L * u(rng);
        CertificateParams cp;
        try {
            cp = select_parameters(model(n, m, sg), 1, 2, 1e6L);
        } catch (const std::exception&) {
            continue;
        }
        ++models;
        if (!(cp.T < std::min({1 / cp.theta, cp.T0, cp.Tstar}))) ++order_bad;
        for (int k = 0; k < 5; ++k, ++samples) {
            const Real t = cp.T * (1 - std::pow(Real(10), -8 * u(rng)));
            const Real y = y_closed_form(t, cp.gamma, cp.delta, cp.y0);
            const Real s = 1 / y;
            for (auto f : {eval_hU, eval_hW}) {
                const Jet a = f(s, t, cp, Side::Inner), b = f(s, t, cp, Side::Outer);
                worst_kink = std::max({worst_kink, d(std::abs(a.value / b.value - 1)), d(std::abs(a.ds / b.ds - 1))});
            }
            // central difference of log y; the realised step tp - tm is exact
            const Real h = 1e-5L * (cp.T - t);
            const Real tp = t + h, tm = t - h;
            const Real fd = (std::log(y_closed_form(tp, cp.gamma, cp.delta, cp.y0)) -
                             std::log(y_closed_form(tm, cp.gamma, cp.delta, cp.y0))) / (tp - tm) * y;
            worst_ode = std::max(worst_ode, d(std::abs(fd / (cp.gamma * std::pow(y, 1 + cp.delta)) - 1)));
        }
    }
    return {worst_kink <= 1e-10 && worst_ode <= 1e-6 && order_bad == 0,
            format("%d samples over %d models: kink rel %.1e, ODE residual %.1e, T-order violations %d", samples,
                   models, worst_kink, worst_ode, order_bad)};
}

Verdict confinement_inequalities() {
    const std::vector<std::tuple<int, Real, Real>> cases{{3, 1, 2}, {3, 0, 1.5L}, {4, 1, 2}, {5, 0.5L, 1.5L}, {3, -1, 1}};
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    long points = 0, violations = 0;
    double min_margin = INFINITY;
    for (auto [n, m, sg] : cases) {
        const CertificateParams cp = select_parameters(model(n, m, sg), 1, 2, 1e6L);
        const Real e1 = std::exp(Real(1));
        const Real s1 = cp.audit.s1;
        const Real y_req = std::pow(2 * e1 * cp.mu_hi / (n * cp.a), 1 / (1 - cp.beta));
        for (int k = 0; k < 2000; ++k, ++points) {
            const Real y = y_req * std::pow(Real(10), 40 * u(rng));
            const bool inner = k % 2 == 0;
            Real s;
            if (inner) s = std::pow(Real(10), -20 * u(rng)) / y;
            else s = (1 / y) * std::pow(s1 * y, Real(u(rng)));
            s = std::min(s, s1);
            const Real W = eval_shape(s, y, 0, cp.beta, cp.a).value;
            const Real lhs = W - e1 * cp.mu_hi * s / n;
            const Real rhs = inner ? cp.a / 2 * std::pow(y, 1 - cp.beta) * s : cp.a / 2 * std::pow(s, cp.beta);
            if (lhs < rhs - 1e-12L) ++violations;
            min_margin = std::min(min_margin, d(lhs / rhs - 1));
        }
    }
    return {violations == 0 && points >= 10000,
            format("%ld points, %ld violations beyond 1e-12, min relative margin %.3e", points, violations, min_margin)};
}

// The telescoped mass U(R^n) - U(0) equals the boundary value and so tracks the
// mass ODE by construction. The asymmetric verdict therefore rests on the
// trapezoid of the nodal density. Symmetric rates make conservation structural,
// and there the telescoped mass is the quantity held to 1e-8.
Verdict mass_oracle(int N, Real s_min_rel) {
    std::string detail = format("N=%d s_min_rel=%.0e: ", N, d(s_min_rel));
    bool ok = true;
    {
        ModelParams p;
        p.k1 = 0.5L;
        p.k2 = 1.5L;
        p.l1 = 1;
        p.l2 = 2;
        p.sigma = 0.5L;
        RunControls c;
        c.N = N;
        c.s_min_rel = s_min_rel;
        c.horizon = 2;
        const RunOutcome o = run(p, gaussian_bump(p, 1, 0.3L), gaussian_bump(p, 2, 0.4L), c);
        const Real omega = domain_volume(p);
        const Vec2 z0{o.series.front().mass_u / omega, o.series.front().mass_w / omega};
        double worst = 0, nodal = 0;
        for (const auto& s : o.series) {
            if (s.t > 0.9L * o.t_end) break;
            const Vec2 z = mass_ode(s.t, p, z0);
            worst = std::max({worst, d(std::abs(s.mass_u / (z.x * omega) - 1)), d(std::abs(s.mass_w / (z.y * omega) - 1))});
            nodal = std::max({nodal, d(std::abs(s.mass_u_nodal / (z.x * omega) - 1)),
                              d(std::abs(s.mass_w_nodal / (z.y * omega) - 1))});
        }
        ok = ok && o.kind == OutcomeKind::Bounded && nodal <= 1e-4;
        detail += format("asymmetric %s: nodal quadrature rel %.1e (telescoped %.1e); ", to_string(o.kind), nodal, worst);
    }
    {
        ModelParams p;
        p.sigma = 0.5L;
        RunControls c;
        c.N = N;
        c.s_min_rel = s_min_rel;
        c.horizon = 5;
        const RunOutcome o = run(p, gaussian_bump(p, 1.5L, 0.2L), gaussian_bump(p, 1.5L, 0.35L), c);
        const Real m0 = o.series.front().mass_u_nodal, w0 = o.series.front().mass_w_nodal;
        double worst = 0, tele = 0;
        for (const auto& s : o.series) {
            worst = std::max({worst, d(std::abs(s.mass_u_nodal / m0 - 1)), d(std::abs(s.mass_w_nodal / w0 - 1))});
            tele = std::max({tele, d(std::abs(s.mass_u / o.series.front().mass_u - 1)),
                             d(std::abs(s.mass_w / o.series.front().mass_w - 1))});
        }
        ok = ok && o.kind == OutcomeKind::Bounded && tele <= 1e-8;
        detail += format("symmetric %s: telescoped drift %.1e (nodal quadrature %.1e)", to_string(o.kind), tele, worst);
    }
    return {ok, detail};
}

Verdict mass_dichotomy() {
    std::string detail;
    bool ok = true;
    {
        ModelParams p;
        p.k1 = 2;
        p.k2 = 1;
        p.l1 = 1;
        p.l2 = 1.5L;
        p.sigma = 0.5L;
        RunControls c;
        c.N = 256;
        c.horizon = 1e3L;
        const RunOutcome o = run(p, gaussian_bump(p, 1, 0.2L), gaussian_bump(p, 0.5L, 0.3L), c);
        const Vec2 v = left_perron_vector(p);
        const Real e0 = v.x * o.series.front().mass_u + v.y * o.series.front().mass_w;
        double worst = 0;
        for (const auto& s : o.series) worst = std::max(worst, d((v.x * s.mass_u + v.y * s.mass_w) / e0));
        ok = ok && o.kind == OutcomeKind::Bounded && o.t_end >= c.horizon && worst <= 1.01;
        detail += format("k2l2<=k1l1 %s to t=%g: envelope ratio max %.4f; ", to_string(o.kind), d(o.t_end), worst);
    }
    {
        ModelParams p;
        p.k1 = 1;
        p.k2 = 2;
        p.l1 = 1;
        p.l2 = 2;
        p.sigma = 0.5L;
        const Real r = real_eigenvalues(rate_matrix(p)).first;
        const Real predicted = std::log(Real(10)) / r;
        RunControls c;
        c.N = 256;
        c.horizon = 1.5L * predicted;
        c.output_interval = c.horizon / 2000;
        const RunOutcome o = run(p, gaussian_bump(p, 1, 0.2L), gaussian_bump(p, 0.5L, 0.3L), c);
        const Vec2 v = left_perron_vector(p);
        auto level = [&](const Diagnostics& s) { return v.x * s.mass_u + v.y * s.mass_w; };
        const Real e0 = level(o.series.front());
        Real observed = NAN;
        for (std::size_t i = 1; i < o.series.size(); ++i) {
            const Real a = std::log(level(o.series[i - 1]) / e0), b = std::log(level(o.series[i]) / e0);
            const Real target = std::log(Real(10));
            if (a < target && b >= target) {
                observed = o.series[i - 1].t + (target - a) / (b - a) * (o.series[i].t - o.series[i - 1].t);
                break;
            }
        }
        const bool within = std::isfinite(d(observed)) && std::abs(observed / predicted - 1) <= 0.1L;
        ok = ok && within;
        detail += format("k2l2>k1l1 %s: x10 at t=%.4f, predicted ln10/r=%.4f", to_string(o.kind), d(observed), d(predicted));
    }
    return {ok, detail};
}

Verdict blowup_and_boundedness() {
    std::string detail;
    bool ok = true;
    {
        const auto t0 = Clock::now();
        const ModelParams p = model(3, 1, 2);
        CanonicalConfig cc;
        cc.controls.N = 512;
        cc.data = DataKind::Subsolution;
        const CertificateParams cp = cc.masses.select(p);
        Real worst = INFINITY;
        bool refused = false;
        const CanonicalRun r = run_canonical(p, cc, [&](const RadialState& st) {
            GriddedSolution g;
            g.s = st.s;
            g.frames.push_back({st.t, st.U, st.W});
            try {
                const ComparisonReport c = comparison_hypotheses_check(cp, g);
                worst = std::min(worst, c.min_margin);
            } catch (const std::exception&) {
                refused = true;
            }
        });
        const double secs = since(t0);
        const bool good = r.outcome.kind == OutcomeKind::BlowUp && r.outcome.t_end < cp.T && worst >= -1e-6L &&
                          !refused && secs < 120;
        ok = ok && good;
        detail += format("(3,1,2) %s at t=%.3e < T=%.3e, min (U-Ulow)/scale %.1e, %.1fs; ", to_string(r.outcome.kind),
                         d(r.outcome.t_end), d(cp.T), d(worst), secs);
    }
    for (auto [m, sg] : {std::pair{1.0L, 1.0L}, std::pair{-5.0L, 0.4L}}) {
        const auto t0 = Clock::now();
        const ModelParams p = model(3, m, sg);
        CanonicalConfig cc;
        cc.controls.N = 512;
        cc.controls.horizon = 10;
        cc.data = DataKind::Gaussian;
        const CanonicalRun r = run_canonical(p, cc);
        const double secs = since(t0);
        const Real growth = r.outcome.final_decade_growth ? *r.outcome.final_decade_growth : NAN;
        bool good = r.outcome.kind == OutcomeKind::Bounded && secs < 120;
        if (m == 1) good = good && satisfies_kl2(p) && growth < 0.05L;
        ok = ok && good;
        detail += format("(3,%g,%g) %s to t=%g, final-decade growth %.2e, %.1fs; ", d(m), d(sg),
                         to_string(r.outcome.kind), d(r.outcome.t_end), d(growth), secs);
    }
    return {ok, detail};
}

Verdict manufactured_order() {
    ModelParams p;
    std::vector<Real> errs;
    for (int N : {128, 256, 512}) errs.push_back(mms::run(p, N, 0.5L, 1e-7L).error);
    const double o1 = std::log2(d(errs[0] / errs[1])), o2 = std::log2(d(errs[1] / errs[2]));
    return {std::min(o1, o2) >= 1.8,
            format("errors %.3e %.3e %.3e, orders %.3f %.3f", d(errs[0]), d(errs[1]), d(errs[2]), o1, o2)};
}

Verdict sweep_agreement() {
    const auto t0 = Clock::now();
    SweepConfig cfg;  // 9 x 9, n = 3, m in [-1, 2], sigma in [0, 2.5], margin 0.25
    cfg.workers = 8;
    const SweepResult r = run_sweep(cfg);
    const double secs = since(t0);
    const auto& s = r.summary;
    const bool ok = s.agreement && *s.agreement >= 0.9L && secs < 1800;
    return {ok, format("agreement %s (%d/%d eligible), %d monotonicity breaks, %.0fs with 8 workers on %u cores",
                       s.agreement ? format("%.3f", d(*s.agreement)).c_str() : "undefined", s.agreeing, s.eligible,
                       s.monotonicity_violations, secs, std::thread::hardware_concurrency())};
}

Verdict tamper_negative() {
    const ModelParams p = model(3, 1, 2);
    const CertificateParams base = select_parameters(p, 1, 2, 1e6L);
    std::string detail;
    bool ok = true;
    for (const char* t : {"theta=0", "gamma*=1000"}) {
        CertificateParams cp = base;
        apply_tamper(cp, t);
        const CertificateReport r = certify(cp, p, CertifyGrid{});
        // locate the largest positive violation among operators and checks
        std::string where = "none";
        Real best = 0;
        for (auto [name, reg] : {std::pair{"P inner", &r.P_inner}, {"P outer", &r.P_outer}, {"Q inner", &r.Q_inner},
                                 {"Q outer", &r.Q_outer}})
            if (reg->any && reg->ratio > best) {
                best = reg->ratio;
                where = format("%s at s=%.3e t=%.3e", name, d(reg->s), d(reg->t));
            }
        for (const auto& c : r.checks)
            if (!c.ok && c.worst > best) {
                best = c.worst;
                where = format("'%s' at t=%.3e", c.name.c_str(), d(c.t));
            }
        ok = ok && !r.pass && best > 0;
        detail += format("%s -> %s, max %.2e %s; ", t, r.pass ? "pass" : "fail", d(best), where.c_str());
    }
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::warn);
    setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"certificate suite", certificate_suite},
        {"closed-form identities", closed_forms},
        {"confinement inequalities", confinement_inequalities},
        {"mass oracle", [] { return mass_oracle(1024, 1e-4L); }},
        {"mass dichotomy", mass_dichotomy},
        {"blow-up and boundedness runs", blowup_and_boundedness},
        {"manufactured-solution order", manufactured_order},
        {"sweep agreement", sweep_agreement},
        {"tampered certificates fail", tamper_negative},
    };
    if (argc == 4 && std::string(argv[1]) == "mass") {
        const Verdict v = mass_oracle(std::atoi(argv[2]), std::strtold(argv[3], nullptr));
        std::printf("%s %s\n", v.pass ? "PASS" : "FAIL", v.detail.c_str());
        return 0;
    }
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("criterion %d %s: %s [%.1fs] %s\n", id, criteria[i].first, v.pass ? "PASS" : "FAIL", since(t0),
                    v.detail.c_str());
    }
    return failed == 0 ? 0 : 1;
}
