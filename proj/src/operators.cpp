#include "kslab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

namespace kslab {

namespace {

Real weight(Real s, int n) { return Real(n) * n * std::pow(s, 2 - Real(2) / n); }

// The boundary node s = R^n is admitted since the certify grid ends there.
void check_interior(Real s, const ModelParams& p, const char* who) {
    if (!(s > 0) || s > mass_extent(p) * (1 + 1e-12L))
        throw DomainError(std::string(who) + ": s outside (0, R^n]");
}

}  // namespace

OperatorValue apply_P(Real s, const Jet& phi, const Jet& psi, Real mu_hi, const ModelParams& p) {
    check_interior(s, p, "apply_P");
    if (phi.ds < 0) throw DomainError("apply_P: phi_s must be nonnegative");
    const Real xi = p.n * phi.ds;
    const Real diff = weight(s, p.n) * diffusivity(xi, p) * phi.dss;
    const Real Sv = sensitivity(xi, p);
    const Real drift = Sv * psi.value, back = Sv * mu_hi * s / p.n;
    const Real decay = p.k1 * phi.value;
    return {phi.dt - diff - drift + back + decay,
            std::abs(phi.dt) + std::abs(diff) + std::abs(drift) + std::abs(back) + std::abs(decay)};
}

OperatorValue apply_Q(Real s, const Jet& phi, const Jet& psi, const ModelParams& p) {
    check_interior(s, p, "apply_Q");
    const Real diff = weight(s, p.n) * psi.dss;
    const Real decay = p.l1 * psi.value, source = p.l2 * phi.value;
    return {psi.dt - diff + decay - source,
            std::abs(psi.dt) + std::abs(diff) + std::abs(decay) + std::abs(source)};
}

namespace {

void absorb(RegionMax& r, const OperatorValue& v, Real s, Real t) {
    const Real ratio = v.scale > 0 ? v.value / v.scale : v.value;
    if (!r.any || ratio > r.ratio) r = {ratio, v.value, v.scale, s, t, true};
}

void merge(RegionMax& into, const RegionMax& r) {
    if (r.any && (!into.any || r.ratio > into.ratio)) into = r;
}

void absorb(CheckResult& c, Real margin, Real t) {
    if (margin > c.worst) {
        c.worst = margin;
        c.t = t;
    }
}

std::vector<Real> geometric(Real lo, Real hi, int count) {
    std::vector<Real> v(count);
    if (count == 1) {
        v[0] = hi;
        return v;
    }
    const Real ll = std::log(lo), lh = std::log(hi);
    for (int i = 0; i < count; ++i) v[i] = std::exp(ll + (lh - ll) * i / (count - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

struct Partial {
    RegionMax P_in, P_out, Q_in, Q_out;
    std::vector<CheckResult> checks;
};

enum CheckId { kU0, kW0, kUR, kWR, kSlope, kEnvGs, kEnvL2, kEnvGss, kEnvSq, kEnvPow, kSteep, kCheckCount };

const char* kCheckNames[kCheckCount] = {
    "U(0,t) = 0",       "W(0,t) = 0",        "U(R^n,t) <= mu_lo R^n/n", "W(R^n,t) <= mu_lo R^n/n",
    "U_s, W_s >= 0",    "y' <= gamma_star y^(1+delta_star)", "y' <= l2 y^(1-alpha+beta)",
    "y' <= gamma_ss y^(1+delta_ss)", "y' <= y^2", "y' <= y^(1+2/n)", "y >= y_star, y > max(1, R^-n)",
};

}  // namespace

CertificateReport certify(const CertificateParams& cp, const ModelParams& p, const CertifyGrid& g) {
    if (g.n_s < 100 || g.n_t < 100) throw ConfigError("certify grid needs at least 100 points per axis");
    if (!(g.kink_band > 0) || !(g.t_clamp > 0) || !(g.t_clamp < 1)) throw ConfigError("certify grid band/clamp invalid");
    const Real Rn = cp.extent();
    const Real T = cp.T;

    // time slices: remaining time T - t geometric from T down to t_clamp T
    std::vector<Real> ts(g.n_t);
    for (int j = 0; j < g.n_t; ++j) {
        const Real tau = T * std::pow(g.t_clamp, Real(j) / (g.n_t - 1));
        ts[j] = T - tau;
    }
    ts.front() = 0;

    const int n_in = std::max(20, g.n_s / 3);
    const int n_out = g.n_s - n_in;
    const auto& th = cp.audit;
    const std::vector<Real> marks{th.s1, th.s_sss, th.s_ssss, cp.s0};

    auto slice = [&](int j, Partial& out) {
        const Real t = ts[j];
        const Real y = y_closed_form(t, cp.gamma, cp.delta, cp.y0);
        const Real kink = 1 / y;
        std::vector<Real> inner = geometric(g.inner_depth * kink, (1 - g.kink_band) * kink, n_in);
        std::vector<Real> outer = geometric((1 + g.kink_band) * kink, Rn, n_out);
        for (Real mk : marks)
            if (mk > outer.front() && mk < Rn) outer.push_back(mk);
        for (int region = 0; region < 2; ++region) {
            const auto& ss = region == 0 ? inner : outer;
            const Side side = region == 0 ? Side::Inner : Side::Outer;
            for (Real s : ss) {
                const PairJet pj = eval_pair(s, t, cp, side);
                if (pj.U.ds < 0 || pj.W.ds < 0) absorb(out.checks[kSlope], 1, t);
                const OperatorValue Pv = apply_P(s, pj.U, pj.W, cp.mu_hi, p);
                const OperatorValue Qv = apply_Q(s, pj.U, pj.W, p);
                absorb(region == 0 ? out.P_in : out.P_out, Pv, s, t);
                absorb(region == 0 ? out.Q_in : out.Q_out, Qv, s, t);
            }
        }
        const PairJet z = eval_pair(0, t, cp);
        const PairJet e = eval_pair(Rn, t, cp);
        const Real cap = cp.mu_lo * Rn / p.n;
        absorb(out.checks[kU0], std::abs(z.U.value), t);
        absorb(out.checks[kW0], std::abs(z.W.value), t);
        absorb(out.checks[kUR], e.U.value / cap - 1, t);
        absorb(out.checks[kWR], e.W.value / cap - 1, t);
        const EnvelopeMargins em = envelope_margins(t, cp, p);
        absorb(out.checks[kEnvGs], em.vs_gamma_star, t);
        absorb(out.checks[kEnvL2], em.vs_l2, t);
        absorb(out.checks[kEnvGss], em.vs_gamma_ss, t);
        absorb(out.checks[kEnvSq], em.vs_square, t);
        absorb(out.checks[kEnvPow], em.vs_power, t);
        absorb(out.checks[kSteep], em.steepness, t);
    };

    auto fresh = [] {
        Partial part;
        for (int c = 0; c < kCheckCount; ++c) part.checks.push_back({kCheckNames[c]});
        return part;
    };
    Partial total = fresh();
    const int workers = std::max(1, std::min(g.workers, g.n_t));
    {
        std::mutex mu;
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                Partial part = fresh();
                for (int j = w; j < g.n_t; j += workers) slice(j, part);
                std::lock_guard lock(mu);
                merge(total.P_in, part.P_in);
                merge(total.P_out, part.P_out);
                merge(total.Q_in, part.Q_in);
                merge(total.Q_out, part.Q_out);
                for (int c = 0; c < kCheckCount; ++c)
                    if (part.checks[c].worst > total.checks[c].worst) total.checks[c] = part.checks[c];
            });
    }

    CertificateReport rep;
    rep.n_s = g.n_s;
    rep.n_t = g.n_t;
    rep.spacing = "t: T - t geometric from T to t_clamp*T; s: geometric on each side of the kink 1/y(t)";
    rep.tolerance_rel = g.rel_tol;
    rep.tolerance_abs = g.abs_tol;
    rep.P_inner = total.P_in;
    rep.P_outer = total.P_out;
    rep.Q_inner = total.Q_in;
    rep.Q_outer = total.Q_out;
    auto op_ok = [&](const RegionMax& r, const char* name) {
        if (r.any && r.value > g.rel_tol * r.scale + g.abs_tol)
            rep.failures.push_back(std::string(name) + " positive");
    };
    op_ok(rep.P_inner, "P inner region");
    op_ok(rep.P_outer, "P outer region");
    op_ok(rep.Q_inner, "Q inner region");
    op_ok(rep.Q_outer, "Q outer region");

    CheckResult order{"T < min(1/theta, T0, Tstar)"};
    order.worst = T * std::max({cp.theta, 1 / cp.T0, 1 / cp.Tstar}) - 1;
    total.checks.push_back(order);
    for (auto& c : total.checks) {
        const Real slack = c.name.rfind("U(0", 0) == 0 || c.name.rfind("W(0", 0) == 0 ? 0 : g.rel_tol;
        c.ok = c.worst <= slack;
        if (!c.ok) rep.failures.push_back(c.name + " violated");
    }
    rep.checks = std::move(total.checks);
    rep.pass = rep.failures.empty();
    return rep;
}

ComparisonReport comparison_hypotheses_check(const CertificateParams& cp, const GriddedSolution& up, Real rel_tol,
                                             const std::vector<Real>* points) {
    if (up.s.size() < 2 || up.frames.empty()) throw DomainError("comparison: empty solution");
    for (const auto& f : up.frames)
        if (f.U.size() != up.s.size() || f.W.size() != up.s.size()) throw DomainError("comparison: frame size mismatch");
    const std::vector<Real>& pts = points ? *points : up.s;
    for (Real s : pts)
        if (s < up.s.front() || s > up.s.back()) throw DomainError("comparison: extrapolation refused");

    ComparisonReport rep;
    for (const auto& f : up.frames)
        for (std::size_t i = 0; i < up.s.size(); ++i) rep.scale = std::max({rep.scale, std::abs(f.U[i]), std::abs(f.W[i])});
    if (rep.scale == 0) rep.scale = 1;
    rep.tolerance = rel_tol * rep.scale;

    auto interp = [&](const std::vector<Real>& v, Real s) {
        auto it = std::upper_bound(up.s.begin(), up.s.end(), s);
        if (it == up.s.end()) return v.back();
        if (it == up.s.begin()) return v.front();
        const std::size_t k = static_cast<std::size_t>(it - up.s.begin());
        const Real w = (s - up.s[k - 1]) / (up.s[k] - up.s[k - 1]);
        return v[k - 1] + w * (v[k] - v[k - 1]);
    };

    for (std::size_t fi = 0; fi < up.frames.size(); ++fi) {
        const auto& f = up.frames[fi];
        if (!(f.t < cp.T)) throw DomainError("comparison: frame beyond the subsolution blow-up time");
        // lateral values
        const PairJet e = eval_pair(up.s.back(), f.t, cp);
        if (f.U.front() < -rep.tolerance || f.W.front() < -rep.tolerance ||
            f.U.back() < e.U.value - rep.tolerance || f.W.back() < e.W.value - rep.tolerance)
            rep.lateral_ok = false;
        for (Real s : pts) {
            const PairJet lo = eval_pair(s, f.t, cp);
            const Real du = interp(f.U, s) - lo.U.value;
            const Real dw = interp(f.W, s) - lo.W.value;
            rep.min_margin = std::min(rep.min_margin, du / rep.scale);
            rep.min_margin_w = std::min(rep.min_margin_w, dw / rep.scale);
            const bool bad = du < -rep.tolerance || dw < -rep.tolerance;
            if (bad) {
                if (fi == 0) rep.initial_ok = false;
                else rep.conclusion_ok = false;
                if (!rep.first_violation) rep.first_violation = std::make_pair(s, f.t);
            }
        }
    }
    return rep;
}

}  // namespace kslab
