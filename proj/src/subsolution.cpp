#include "kslab/subsolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "kslab/mass_ode.hpp"

namespace kslab {

namespace {

constexpr Real kE = std::numbers::e_v<Real>;

Real pos(Real x) { return x > 0 ? x : 0; }

template <class F>
Real golden_max_log(F f, Real lo, Real hi) {
    // Maximise f(exp(u)) for u in [log lo, log hi].
    const Real g = (std::sqrt(Real(5)) - 1) / 2;
    Real a = std::log(lo), b = std::log(hi);
    Real c = b - g * (b - a), d = a + g * (b - a);
    Real fc = f(std::exp(c)), fd = f(std::exp(d));
    for (int i = 0; i < 200 && b - a > 1e-12L; ++i) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(std::exp(c));
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(std::exp(d));
        }
    }
    return std::max(fc, fd);
}

template <class F>
Real sup_on(F f, Real xmax) {
    Real best = std::max(f(Real(0)), f(xmax));
    return std::max(best, golden_max_log(f, xmax * 1e-30L, xmax));
}

}  // namespace

Real CertificateParams::extent() const { return std::pow(R, static_cast<Real>(n)); }

Real coefficient_a(Real mu_lo, Real R, int n) {
    if (!(mu_lo > 0) || !(R > 0) || n < 1) throw DomainError("coefficient_a: nonpositive input");
    const Real Rn = std::pow(R, static_cast<Real>(n));
    return mu_lo * Rn / (n * std::pow(kE, 1 / kE) * (Rn + 1));
}

Real blowup_time(Real gamma, Real delta, Real y0) {
    return 1 / (gamma * delta * std::pow(y0, delta));
}

Real y_closed_form(Real t, Real gamma, Real delta, Real y0) {
    if (!(gamma > 0) || !(delta > 0) || !(y0 > 0)) throw DomainError("y_closed_form: nonpositive parameter");
    if (t < 0) throw DomainError("y_closed_form: negative time");
    const Real T = blowup_time(gamma, delta, y0);
    if (t >= T) throw BlowUpTimeExceeded("y_closed_form: t >= T");
    return y0 * std::pow(1 - t / T, -1 / delta);
}

Jet eval_shape(Real s, Real y, Real ydot, Real e, Real a, Side side) {
    const bool inner = side == Side::Inner || (side == Side::Auto && s * y <= 1);
    const Real g = ydot / y;  // logarithmic rate keeps magnitudes small
    Jet j;
    if (inner) {
        const Real slope = a * std::pow(y, 1 - e);
        j.value = slope * s;
        j.ds = slope;
        j.dt = (1 - e) * slope * s * g;
        j.dss = 0;
    } else {
        const Real X = s - (1 - e) / y;
        const Real k = std::pow(e, 1 - e) * a;
        const Real Xe1 = std::pow(X, e - 1);
        j.value = std::pow(e, -e) * a * std::pow(X, e);
        j.ds = k * Xe1;
        j.dt = k * (1 - e) * Xe1 * g / y;
        j.dss = -k * (1 - e) * Xe1 / X;
    }
    return j;
}

namespace {

Jet eval_hat(Real s, Real t, const CertificateParams& cp, Real e, Side side) {
    if (!(s >= 0) || s > cp.extent() * (1 + 1e-15L)) throw DomainError("subsolution: s outside [0, R^n]");
    const Real y = y_closed_form(t, cp.gamma, cp.delta, cp.y0);
    if (!(y * cp.extent() > 1)) throw DomainError("subsolution: y(t) <= 1/R^n");
    return eval_shape(s, y, cp.gamma * std::pow(y, 1 + cp.delta), e, cp.a, side);
}

Jet damp(const Jet& j, Real theta, Real t) {
    const Real f = std::exp(-theta * t);
    return {f * j.value, f * (j.dt - theta * j.value), f * j.ds, f * j.dss};
}

}  // namespace

Jet eval_hU(Real s, Real t, const CertificateParams& cp, Side side) {
    return eval_hat(s, t, cp, cp.alpha, side);
}

Jet eval_hW(Real s, Real t, const CertificateParams& cp, Side side) {
    return eval_hat(s, t, cp, cp.beta, side);
}

PairJet eval_pair(Real s, Real t, const CertificateParams& cp, Side side) {
    return {damp(eval_hU(s, t, cp, side), cp.theta, t), damp(eval_hW(s, t, cp, side), cp.theta, t)};
}

// ---------------------------------------------------------------------------
// mass window

namespace {

// First t in (0, cap] with f(t) < 0, or cap if none. f(0) > 0 and f' changes sign at most once.
template <class F>
std::pair<Real, bool> first_negative(F f, Real cap) {
    constexpr int K = 4000;
    std::vector<Real> ts{0};
    for (int k = 0; k <= K; ++k) ts.push_back(cap * std::pow(Real(10), -15 + 15 * Real(k) / K));
    std::vector<Real> fs;
    fs.reserve(ts.size());
    for (Real t : ts) fs.push_back(f(t));

    auto bisect = [&](Real lo, Real hi) {
        for (int i = 0; i < 300 && hi - lo > 1e-15L * hi; ++i) {
            const Real mid = (lo + hi) / 2;
            (f(mid) < 0 ? hi : lo) = mid;
        }
        return lo;
    };
    for (std::size_t k = 1; k < ts.size(); ++k) {
        if (fs[k] < 0) return {bisect(ts[k - 1], ts[k]), true};
        // a dip may hide between samples around a local minimum
        if (k + 1 < ts.size() && fs[k] <= fs[k - 1] && fs[k] <= fs[k + 1]) {
            Real a = ts[k - 1], b = ts[k + 1];
            const Real g = (std::sqrt(Real(5)) - 1) / 2;
            for (int i = 0; i < 200 && b - a > 1e-18L * b; ++i) {
                const Real c = b - g * (b - a), d = a + g * (b - a);
                (f(c) < f(d) ? b : a) = (f(c) < f(d) ? d : c);
            }
            const Real tm = (a + b) / 2;
            if (f(tm) < 0) return {bisect(ts[k - 1], tm), true};
        }
    }
    return {cap, false};
}

}  // namespace

MassWindow mass_window_T0(const ModelParams& p, Real M_lo, Real M_hi, Real cap) {
    validate(p);
    if (!(M_lo > 0) || !(M_hi > M_lo)) throw DomainError("mass window needs 0 < M_lo < M_hi");
    if (!(cap > 0)) throw DomainError("mass window cap must be positive");
    const Real omega = domain_volume(p);
    const Mat2 A = rate_matrix(p);
    const Vec2 lo0{M_lo / omega, M_lo / omega}, hi0{M_hi / omega, M_hi / omega};
    const Real L = M_lo / (2 * omega), H = 2 * M_hi / omega;

    struct Constraint {
        const char* name;
        std::function<Real(Real)> f;
    };
    const std::array<Constraint, 3> cs{{
        {"z_lo1", [&](Real t) { return (expm(A, t) * lo0).x / L - 1; }},
        {"z_lo2", [&](Real t) { return (expm(A, t) * lo0).y / L - 1; }},
        {"z_hi2", [&](Real t) { return 1 - (expm(A, t) * hi0).y / H; }},
    }};
    MassWindow out{cap, "none"};
    for (const auto& c : cs) {
        auto [t, hit] = first_negative(c.f, cap);
        if (hit && t < out.T0) out = {t, c.name};
    }
    return out;
}

// ---------------------------------------------------------------------------
// parameter selection

CertificateParams select_parameters(const ModelParams& p, Real M_lo, Real M_hi, Real Tstar,
                                    const SelectionOptions& opt) {
    validate(p);
    if (p.n < 3) throw UnsupportedDimension("certificate construction needs n >= 3");
    if (!regime_classify(p).has(Regime::Supercritical))
        throw UnsupportedRegime("certificate construction needs the supercritical regime");
    if (!(Tstar > 0)) throw DomainError("Tstar must be positive");
    if (!(p.s0_coef > 0)) throw DomainError("certificate needs s0_coef > 0");

    const int n = p.n;
    const Real nn = n;
    const Real sig = p.sigma, m = p.m;
    const Real Rn = mass_extent(p);
    const Real omega = domain_volume(p);
    const Envelope env = envelope(p);

    CertificateParams cp;
    Thresholds& th = cp.audit;
    cp.n = n;
    cp.R = p.R;
    cp.mu_lo = M_lo / (2 * omega);
    cp.mu_hi = 2 * M_hi / omega;
    cp.a = coefficient_a(cp.mu_lo, p.R, n);
    cp.T0 = mass_window_T0(p, M_lo, M_hi, opt.window_cap).T0;
    cp.Tstar = Tstar;
    th.T_s = std::min(cp.T0, Tstar);
    const Real a = cp.a;

    // Exponent box: every constraint is affine or concave in (alpha, beta),
    // so checking the corners of [0, 2 eta^2] x [2/n, 2/n + 2 eta] suffices.
    th.delta_star = (sig - 2 / nn) / 2;
    Real eta = 0.25L;
    Real slack77 = 0;
    bool found = false;
    std::string failing = "exponent box";
    for (int it = 0; it < opt.max_halvings; ++it, eta /= 2) {
        const Real As = 2 * eta * eta, Bs = 2 / nn + 2 * eta;
        if (!(Bs < 1)) { failing = "beta_star < 1"; continue; }
        Real f56 = INFINITY, f76 = INFINITY, f77 = INFINITY;
        for (Real x : {Real(0), As})
            for (Real y : {2 / nn, Bs}) {
                f56 = std::min(f56, (1 - x) * sig + x - y);
                f76 = std::min(f76, -2 / nn - y + (1 - x) * (sig - m + 1) + x);
                f77 = std::min(f77, 1 - pos(y - (1 - x) * (sig - 1)));
            }
        if (!(f56 >= th.delta_star)) { failing = "taxis exponent balance (delta_star)"; continue; }
        if (!(f76 > 0)) { failing = "diffusion exponent gap"; continue; }
        if (!(f77 > 0)) { failing = "growth exponent slack (delta_ss)"; continue; }
        th.alpha_star = As;
        th.beta_star = Bs;
        slack77 = f77;
        found = true;
        break;
    }
    if (!found) throw SelectionFailure(failing, "exponent selection did not converge: " + failing);
    th.eta = eta;
    cp.alpha = eta * eta;
    cp.beta = 2 / nn + eta;
    th.delta_ss = slack77 / 2;
    const Real al = cp.alpha, be = cp.beta;

    th.s1 = std::pow(nn * a / (2 * kE * cp.mu_hi), 1 / (1 - be));
    th.s_cap_slope = std::pow(nn * std::pow(al, 1 - al) * a / (kE * p.xi0), 1 / (1 - al));
    const Real E = -2 / nn - be + (1 - al) * (sig - m + 1) + al;
    th.c1 = std::max<Real>(1, std::pow(al, (1 - al) * (sig - m + 1) + al - 2));
    th.c2 = std::max<Real>(1, std::pow(al, (1 - al) * (sig - 1)));
    const Real C = 2 * std::pow(nn, m + 1 - sig) * std::pow(al, (1 - al) * (m - sig)) * (1 - al) *
                   std::pow(a, m - 1 - sig) * env.KD * std::pow(kE, sig - m + 1) / env.kS;
    th.s_cap_balance = std::pow(1 / (2 * C * th.c1), 1 / E);
    th.s_sss = std::min({Real(1), th.s1, th.s_cap_slope, th.s_cap_balance});
    th.gamma_ss = std::pow(nn * a, sig) * env.kS /
                  (4 * std::pow(al, (1 - al) * (1 - sig)) * (1 - al) * std::pow(kE, sig) * th.c2);
    th.s_ssss = std::min<Real>(
        1, std::pow(std::min(p.l2 * be / (2 * nn * nn), p.l2 / 2), 1 / (be - 2 / nn - al)));
    cp.s0 = std::min(th.s_sss, th.s_ssss);
    if (!(cp.s0 > 0) || !std::isfinite(cp.s0)) throw SelectionFailure("s0", "outer threshold s0 underflowed");

    th.gamma_star = std::pow(nn * a / kE, sig) * env.kS / 2;
    th.y_star = std::max({Real(1), std::pow(kE * p.xi0 / (nn * a), 2),
                          std::pow(2 * kE * cp.mu_hi / (nn * a), 1 / (1 - th.beta_star))});

    const Real xmax = nn * a / cp.s0;
    th.sup_D = sup_on([&](Real x) { return diffusivity(x, p); }, xmax);
    th.sup_S = sup_on([&](Real x) { return sensitivity(x, p); }, xmax);
    th.theta_star = p.k1 + (a / cp.s0 + nn * nn * th.sup_D * a * std::pow(p.R, 2 * nn - 2) / (al * cp.s0 * cp.s0) +
                            th.sup_S * cp.mu_hi * kE * Rn / nn) /
                               (a * std::pow(cp.s0, al));
    th.theta_ss = std::max(2 * p.l1, 2 * nn * nn / (be * std::pow(cp.s0, 2 / nn)));
    // strict inequalities theta > theta_star, theta_ss
    cp.theta = std::max({th.theta_star, th.theta_ss, p.k1, p.l1}) * (1 + 1e-9L);
    cp.gamma = std::min({th.gamma_star, th.gamma_ss, p.l2, Real(1)});
    cp.delta = std::min({th.delta_star, th.delta_ss, be - al, 2 / nn});
    if (!std::isfinite(cp.theta) || !(cp.gamma > 0) || !(cp.delta > 0))
        throw SelectionFailure("theta/gamma/delta", "rate constants not representable");

    const Real horizon = opt.safety * std::min(1 / cp.theta, th.T_s);
    const Real yT = std::pow(1 / (cp.gamma * cp.delta * horizon), 1 / cp.delta);
    cp.y0 = std::max({th.y_star, 1 + 1e-6L, 1 / Rn + 1e-6L, yT});
    if (!std::isfinite(cp.y0)) throw SelectionFailure("y0", "initial steepness exceeds extended range");
    cp.T = blowup_time(cp.gamma, cp.delta, cp.y0);
    if (!(cp.T < std::min(1 / cp.theta, th.T_s))) throw SelectionFailure("T", "blow-up time not below horizon");
    return cp;
}

EnvelopeMargins envelope_margins(Real t, const CertificateParams& cp, const ModelParams& p) {
    const Real y = y_closed_form(t, cp.gamma, cp.delta, cp.y0);
    const Real ly = std::log(y);
    const Real lg = std::log(cp.gamma);
    const auto& th = cp.audit;
    auto ratio = [](Real log_ratio) { return std::expm1(log_ratio); };
    // y' = gamma y^{1+delta}
    EnvelopeMargins e;
    e.vs_gamma_star = ratio(lg - std::log(th.gamma_star) + (cp.delta - th.delta_star) * ly);
    e.vs_l2 = ratio(lg - std::log(p.l2) + (cp.delta + cp.alpha - cp.beta) * ly);
    e.vs_gamma_ss = ratio(lg - std::log(th.gamma_ss) + (cp.delta - th.delta_ss) * ly);
    e.vs_square = ratio(lg + (cp.delta - 1) * ly);
    e.vs_power = ratio(lg + (cp.delta - 2 / Real(cp.n)) * ly);
    const Real floor = std::max<Real>(1, 1 / cp.extent());
    e.steepness = std::max(th.y_star / y - 1, floor / y - 1 + std::numeric_limits<Real>::epsilon());
    return e;
}

// ---------------------------------------------------------------------------
// initial data

MassProfiles mass_profiles(const CertificateParams& cp) {
    const Real scale = cp.n * ball_volume(cp.n);
    const Real nn = cp.n;
    return {
        [cp, scale, nn](Real r) {
            if (!(r >= 0) || r > cp.R * (1 + 1e-15L)) throw DomainError("mass profile: r outside [0, R]");
            return scale * eval_pair(std::min(std::pow(r, nn), cp.extent()), 0, cp).U.value;
        },
        [cp, scale, nn](Real r) {
            if (!(r >= 0) || r > cp.R * (1 + 1e-15L)) throw DomainError("mass profile: r outside [0, R]");
            return scale * eval_pair(std::min(std::pow(r, nn), cp.extent()), 0, cp).W.value;
        },
    };
}

InitialData synthesize_initial_data(const CertificateParams& cp, Real target_mass, Real M_lo, Real M_hi) {
    if (!(target_mass >= M_lo) || !(target_mass <= M_hi))
        throw DomainError("target mass outside [M_lo, M_hi]");
    const Real nn = cp.n;
    const Real Rn = cp.extent();
    const Real omega = ball_volume(cp.n) * Rn;
    const PairJet end = eval_pair(Rn, 0, cp);
    InitialData d;
    // n |B1| (U(R^n) + c R^n / n) = target
    d.c_u = (target_mass - nn * ball_volume(cp.n) * end.U.value) / omega;
    d.c_w = (target_mass - nn * ball_volume(cp.n) * end.W.value) / omega;
    if (d.c_u < 0 || d.c_w < 0) throw DomainError("subsolution mass exceeds target");
    auto s_of = [cp, nn, Rn](Real r) {
        if (!(r >= 0)) throw DomainError("initial data: negative radius");
        return std::min(std::pow(r, nn), Rn);
    };
    const Real cu = d.c_u, cw = d.c_w;
    d.u.density = [=](Real r) { return nn * eval_pair(s_of(r), 0, cp).U.ds + cu; };
    d.w.density = [=](Real r) { return nn * eval_pair(s_of(r), 0, cp).W.ds + cw; };
    d.u.cumulative = [=](Real s) { return eval_pair(s, 0, cp).U.value + cu * s / nn; };
    d.w.cumulative = [=](Real s) { return eval_pair(s, 0, cp).W.value + cw * s / nn; };
    return d;
}

}  // namespace kslab
