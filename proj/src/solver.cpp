#include "kslab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace kslab {

namespace {

bool finite_all(const std::vector<Real>& v) {
    return std::all_of(v.begin(), v.end(), [](Real x) { return std::isfinite(x); });
}

Real minmod(Real a, Real b) {
    if (a * b <= 0) return 0;
    return std::abs(a) < std::abs(b) ? a : b;
}

// Thomas algorithm with Dirichlet rows at both ends; lo/di/up/rhs overwritten.
void solve_tridiagonal(std::vector<Real>& lo, std::vector<Real>& di, std::vector<Real>& up, std::vector<Real>& rhs,
                       std::vector<Real>& x) {
    const std::size_t N = di.size();
    for (std::size_t i = 1; i < N; ++i) {
        const Real w = lo[i] / di[i - 1];
        di[i] -= w * up[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    x[N - 1] = rhs[N - 1] / di[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) x[i] = (rhs[i] - up[i] * x[i + 1]) / di[i];
}

Real sup_density(const std::vector<Real>& s, const std::vector<Real>& V, int n) {
    Real best = 0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) best = std::max(best, (V[i + 1] - V[i]) / (s[i + 1] - s[i]));
    return n * best;
}

}  // namespace

const char* to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::BlowUp: return "blowup";
        case OutcomeKind::Bounded: return "bounded";
        case OutcomeKind::StepFloor: return "step_floor";
        case OutcomeKind::Error: return "error";
    }
    return "error";
}

std::vector<Real> make_grid(Real extent, int N, Real s_min) {
    if (N < 4) throw ConfigError("grid needs at least 4 nodes");
    if (!(s_min > 0) || !(s_min < extent)) throw ConfigError("grid needs 0 < s_min < R^n");
    std::vector<Real> s(N);
    s[0] = 0;
    const Real l0 = std::log(s_min), l1 = std::log(extent);
    for (int i = 1; i < N; ++i) s[i] = std::exp(l0 + (l1 - l0) * (i - 1) / (N - 2));
    s[1] = s_min;
    s[N - 1] = extent;
    return s;
}

RadialState initial_state(const ModelParams& p, const std::vector<Real>& grid, const InitialProfile& u0,
                          const InitialProfile& w0) {
    validate(p);
    const std::size_t N = grid.size();
    if (N < 4 || grid.front() != 0) throw ConfigError("initial_state: grid must start at s = 0");
    const Real nn = p.n;
    RadialState st;
    st.s = grid;
    auto cumulate = [&](const InitialProfile& prof, std::vector<Real>& V) {
        V.assign(N, 0);
        if (prof.cumulative) {
            for (std::size_t i = 0; i < N; ++i) V[i] = prof.cumulative(grid[i]);
            V[0] = 0;
            return;
        }
        if (!prof.density) throw ConfigError("initial profile needs a density");
        Real prev = prof.density(0);
        for (std::size_t i = 1; i < N; ++i) {
            const Real cur = prof.density(std::pow(grid[i], 1 / nn));
            V[i] = V[i - 1] + (grid[i] - grid[i - 1]) * (prev + cur) / (2 * nn);
            prev = cur;
        }
    };
    cumulate(u0, st.U);
    cumulate(w0, st.W);
    const Real ext = grid.back();
    st.mu_u = nn * st.U.back() / ext;
    st.mu_w = nn * st.W.back() / ext;
    if (!finite_all(st.U) || !finite_all(st.W)) throw DomainError("initial data not finite");
    return st;
}

std::vector<Real> nodal_density(const std::vector<Real>& s, const std::vector<Real>& V, int n) {
    const std::size_t N = s.size();
    std::vector<Real> u(N);
    auto d3 = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t at) {
        // derivative at s[at] of the quadratic through a, b, c
        const Real xa = s[a], xb = s[b], xc = s[c], x = s[at];
        const Real la = ((x - xb) + (x - xc)) / ((xa - xb) * (xa - xc));
        const Real lb = ((x - xa) + (x - xc)) / ((xb - xa) * (xb - xc));
        const Real lc = ((x - xa) + (x - xb)) / ((xc - xa) * (xc - xb));
        return la * V[a] + lb * V[b] + lc * V[c];
    };
    u[0] = n * d3(0, 1, 2, 0);
    for (std::size_t i = 1; i + 1 < N; ++i) u[i] = n * d3(i - 1, i, i + 1, i);
    u[N - 1] = n * d3(N - 3, N - 2, N - 1, N - 1);
    return u;
}

Diagnostics diagnostics(const RadialState& st, const ModelParams& p, const RunControls& c) {
    Diagnostics d;
    d.t = st.t;
    d.dt = st.dt;
    d.sup_u = sup_density(st.s, st.U, p.n);
    d.sup_w = sup_density(st.s, st.W, p.n);
    const auto u = nodal_density(st.s, st.U, p.n);
    const auto w = nodal_density(st.s, st.W, p.n);
    const Real b1 = ball_volume(p.n);
    auto trapz = [&](auto f) {
        Real acc = 0;
        for (std::size_t i = 0; i + 1 < st.s.size(); ++i) acc += (st.s[i + 1] - st.s[i]) * (f(i) + f(i + 1)) / 2;
        return b1 * acc;
    };
    // u = n U_s has U as its antiderivative, so the mass is exact in the mass coordinate
    d.mass_u = b1 * p.n * (st.U.back() - st.U.front());
    d.mass_w = b1 * p.n * (st.W.back() - st.W.front());
    d.mass_u_nodal = trapz([&](std::size_t i) { return u[i]; });
    d.mass_w_nodal = trapz([&](std::size_t i) { return w[i]; });
    for (Real q : c.p_exponents)
        d.lp.push_back(trapz([&](std::size_t i) { return std::pow(std::max<Real>(u[i], 0) + 1, q); }));
    for (Real q : c.q_exponents)
        d.lq.push_back(trapz([&](std::size_t i) { return std::pow(std::max<Real>(w[i], 0), q); }));
    return d;
}

Solver::Solver(ModelParams p, RunControls c, SolverHooks hooks) : p_(p), c_(std::move(c)), hooks_(std::move(hooks)) {
    validate(p_);
    if (!(c_.rtol > 0) || !(c_.atol >= 0)) throw ConfigError("tolerances must be positive");
    if (!(c_.cfl > 0)) throw ConfigError("cfl must be positive");
    extent_ = mass_extent(p_);
}

void Solver::anchor(const RadialState& st) {
    if (w_.size() != st.s.size()) {
        w_.resize(st.s.size());
        const Real nn = p_.n;
        for (std::size_t i = 0; i < st.s.size(); ++i) w_[i] = nn * nn * std::pow(st.s[i], 2 - 2 / nn);
    }
    z0_ = {p_.n * st.U.back() / extent_, p_.n * st.W.back() / extent_};
    t0_ = st.t;
    anchored_ = true;
}

Vec2 Solver::boundary(Real t) const {
    if (hooks_.boundary) return hooks_.boundary(t);
    const Vec2 z = expm(rate_matrix(p_), t - t0_) * z0_;
    return {z.x * extent_ / p_.n, z.y * extent_ / p_.n};
}

void Solver::explicit_part(const RadialState& st, Real t, std::vector<Real>& eu, std::vector<Real>& ew,
                           std::vector<Real>& du, Real* speed_cap) const {
    const std::size_t N = st.s.size();
    const auto& s = st.s;
    const auto& U = st.U;
    const auto& W = st.W;
    const Real nn = p_.n;
    const Real mu_w = nn * W[N - 1] / extent_;
    eu.assign(N, 0);
    ew.assign(N, 0);
    du.assign(N, 0);
    Real cap = INFINITY;
    auto fwd = [&](std::size_t i) { return (U[i + 1] - U[i]) / (s[i + 1] - s[i]); };
    for (std::size_t i = 1; i + 1 < N; ++i) {
        const Real h0 = s[i] - s[i - 1], h1 = s[i + 1] - s[i];
        const Real dm = fwd(i - 1), dp = fwd(i);
        const Real cen = (h0 * dp + h1 * dm) / (h0 + h1);
        const Real xc = nn * std::max<Real>(cen, 0);
        du[i] = w_[i] * diffusivity(xc, p_) * 2 / (h0 + h1);

        // sign of S' is the sign of 1 + sigma xi
        const Real G = W[i] - mu_w * s[i] / nn;
        const bool forward = G * (1 + p_.sigma * xc) >= 0;
        Real q = cen, h_up = std::min(h0, h1);
        if (forward && i + 2 < N) {
            const Real h2 = s[i + 2] - s[i + 1];
            const Real curv = minmod(fwd(i + 1) - dp, (dp - dm) * (h1 + h2) / (h0 + h1));
            q = dp - h1 / (h1 + h2) * curv;
            h_up = h1;
        } else if (!forward && i >= 2) {
            const Real hm = s[i - 1] - s[i - 2];
            const Real curv = minmod(dm - fwd(i - 2), (dp - dm) * (hm + h0) / (h0 + h1));
            q = dm + h0 / (hm + h0) * curv;
            h_up = h0;
        }
        const Real xi = nn * std::max<Real>(q, 0);
        const Real Sv = sensitivity(xi, p_);
        eu[i] = Sv * G - p_.k1 * U[i] + p_.k2 * W[i];
        ew[i] = -p_.l1 * W[i] + p_.l2 * U[i];
        if (hooks_.force_u) eu[i] += hooks_.force_u(s[i], t);
        if (hooks_.force_w) ew[i] += hooks_.force_w(s[i], t);
        if (speed_cap) {
            // S'(xi) = S(xi) (1 + sigma xi) / (xi (1 + xi))
            const Real slope = xi > 0 ? Sv * (1 + p_.sigma * xi) / (xi * (1 + xi)) : p_.s0_coef;
            const Real v = nn * std::abs(slope * G);
            if (v > 0) cap = std::min(cap, h_up / v);
        }
    }
    if (speed_cap) *speed_cap = cap;
}

void Solver::imex_euler(const RadialState& in, Real t, Real h, RadialState& out, const Parts* given) const {
    const std::size_t N = in.s.size();
    Parts own;
    if (!given) explicit_part(in, t, own.eu, own.ew, own.du, nullptr);
    const Parts& P = given ? *given : own;
    const auto& eu = P.eu;
    const auto& ew = P.ew;
    const auto& du = P.du;
    const Vec2 b = boundary(t + h);
    const auto& s = in.s;
    std::vector<Real> lo(N, 0), di(N, 1), up(N, 0), rhs(N, 0);
    auto solve = [&](const std::vector<Real>& X, const std::vector<Real>& e, const std::vector<Real>* coef, Real right,
                     std::vector<Real>& x) {
        std::fill(lo.begin(), lo.end(), 0);
        std::fill(di.begin(), di.end(), 1);
        std::fill(up.begin(), up.end(), 0);
        rhs[0] = 0;
        rhs[N - 1] = right;
        for (std::size_t i = 1; i + 1 < N; ++i) {
            const Real h0 = s[i] - s[i - 1], h1 = s[i + 1] - s[i];
            const Real d = coef ? (*coef)[i] : w_[i] * 2 / (h0 + h1);
            lo[i] = -h * d / h0;
            up[i] = -h * d / h1;
            di[i] = 1 - lo[i] - up[i];
            rhs[i] = X[i] + h * e[i];
        }
        x.resize(N);
        solve_tridiagonal(lo, di, up, rhs, x);
    };
    out.s = in.s;
    solve(in.U, eu, &du, b.x, out.U);
    solve(in.W, ew, nullptr, b.y, out.W);
}

void Solver::rk_rhs(const RadialState& st, Real t, std::vector<Real>& fu, std::vector<Real>& fw) const {
    std::vector<Real> du;
    explicit_part(st, t, fu, fw, du, nullptr);
    const auto& s = st.s;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const Real h0 = s[i] - s[i - 1], h1 = s[i + 1] - s[i];
        const Real dp = (st.U[i + 1] - st.U[i]) / h1, dm = (st.U[i] - st.U[i - 1]) / h0;
        const Real wp = (st.W[i + 1] - st.W[i]) / h1, wm = (st.W[i] - st.W[i - 1]) / h0;
        fu[i] += du[i] * (dp - dm);
        fw[i] += w_[i] * 2 / (h0 + h1) * (wp - wm);
    }
}

Real Solver::error_norm(const RadialState& a, const RadialState& b) const {
    Real e = 0;
    for (std::size_t i = 1; i + 1 < a.s.size(); ++i) {
        const Real base = c_.atol * a.s[i];
        const Real wu = base + c_.rtol * std::max(std::abs(a.U[i]), std::abs(b.U[i]));
        const Real ww = base + c_.rtol * std::max(std::abs(a.W[i]), std::abs(b.W[i]));
        e = std::max({e, std::abs(a.U[i] - b.U[i]) / wu, std::abs(a.W[i] - b.W[i]) / ww});
    }
    return e;
}

Real Solver::stability_cap(const RadialState& st, Real t, Parts& parts) const {
    Real cap = INFINITY;
    explicit_part(st, t, parts.eu, parts.ew, parts.du, &cap);
    const auto& du = parts.du;
    cap *= c_.cfl;
    if (c_.integrator == Integrator::Explicit) {
        const auto& s = st.s;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            const Real h = std::min(s[i] - s[i - 1], s[i + 1] - s[i]);
            // du = w D 2/(h0+h1); the diffusive rate is about 2 w D / h^2
            const Real rate = std::max(du[i] * (s[i + 1] - s[i - 1]) / 2, w_[i]) * 2 / (h * h);
            cap = std::min(cap, c_.cfl * 2 / rate);
        }
    }
    return cap;
}

Solver::StepResult Solver::step(RadialState& st, Real limit) {
    if (!anchored_) anchor(st);
    const Real floor = c_.floor();
    const bool imex = c_.integrator == Integrator::Imex;
    const Real order_exp = imex ? Real(0.5) : Real(1) / 3;
    Real dt = st.dt > 0 ? st.dt : (c_.dt_initial ? *c_.dt_initial : std::min(limit, c_.horizon * 1e-6L));
    Parts parts;
    const Real cap = stability_cap(st, st.t, parts);
    RadialState cand, half, coarse;
    for (;;) {
        dt = std::min({dt, limit, cap});
        if (dt < floor && dt < limit) return StepResult::Floor;
        const Real t = st.t;
        Real err;
        if (imex) {
            imex_euler(st, t, dt, coarse, &parts);
            imex_euler(st, t, dt / 2, half, &parts);
            imex_euler(half, t + dt / 2, dt / 2, cand);
            err = error_norm(cand, coarse);
            for (std::size_t i = 1; i + 1 < st.s.size(); ++i) {
                cand.U[i] = 2 * cand.U[i] - coarse.U[i];
                cand.W[i] = 2 * cand.W[i] - coarse.W[i];
            }
        } else {
            const std::size_t N = st.s.size();
            std::vector<Real> k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w;
            auto stage = [&](Real tt, std::initializer_list<std::pair<Real, const std::vector<Real>*>> ku,
                             std::initializer_list<std::pair<Real, const std::vector<Real>*>> kw, RadialState& out) {
                out.s = st.s;
                out.U = st.U;
                out.W = st.W;
                for (auto [c, v] : ku)
                    for (std::size_t i = 1; i + 1 < N; ++i) out.U[i] += dt * c * (*v)[i];
                for (auto [c, v] : kw)
                    for (std::size_t i = 1; i + 1 < N; ++i) out.W[i] += dt * c * (*v)[i];
                const Vec2 b = boundary(tt);
                out.U[N - 1] = b.x;
                out.W[N - 1] = b.y;
            };
            rk_rhs(st, t, k1u, k1w);
            stage(t + dt / 2, {{0.5L, &k1u}}, {{0.5L, &k1w}}, half);
            rk_rhs(half, t + dt / 2, k2u, k2w);
            stage(t + 0.75L * dt, {{0.75L, &k2u}}, {{0.75L, &k2w}}, coarse);
            rk_rhs(coarse, t + 0.75L * dt, k3u, k3w);
            stage(t + dt, {{2.0L / 9, &k1u}, {1.0L / 3, &k2u}, {4.0L / 9, &k3u}},
                  {{2.0L / 9, &k1w}, {1.0L / 3, &k2w}, {4.0L / 9, &k3w}}, cand);
            rk_rhs(cand, t + dt, k4u, k4w);
            stage(t + dt, {{7.0L / 24, &k1u}, {0.25L, &k2u}, {1.0L / 3, &k3u}, {0.125L, &k4u}},
                  {{7.0L / 24, &k1w}, {0.25L, &k2w}, {1.0L / 3, &k3w}, {0.125L, &k4w}}, half);
            err = error_norm(cand, half);
        }
        if (!std::isfinite(err) || !finite_all(cand.U) || !finite_all(cand.W)) {
            ++st.stats.rejected;
            dt /= 4;
            if (dt < floor) return StepResult::NonFinite;
            continue;
        }
        if (err <= 1) {
            const Real grow = err > 0 ? std::clamp(0.9L * std::pow(err, -order_exp), Real(0.2), Real(2)) : Real(2);
            const bool hit = limit - dt <= 1e-12L * limit;
            st.U = std::move(cand.U);
            st.W = std::move(cand.W);
            st.t = hit ? t + limit : t + dt;
            const Vec2 b = boundary(st.t);
            const std::size_t N = st.s.size();
            st.U[0] = st.W[0] = 0;
            st.U[N - 1] = b.x;
            st.W[N - 1] = b.y;
            st.mu_u = p_.n * b.x / extent_;
            st.mu_w = p_.n * b.y / extent_;
            // keep the last free step size when the step was shortened by the limit
            st.dt = hit && dt < st.dt ? st.dt : dt * grow;
            ++st.stats.accepted;
            // monotonicity: clip and count beyond 1e-10 * scale
            const Real tol = 1e-10L * std::max(std::abs(b.x), std::abs(b.y));
            for (auto* V : {&st.U, &st.W})
                for (std::size_t i = 1; i + 1 < N; ++i)
                    if ((*V)[i] < (*V)[i - 1]) {
                        if ((*V)[i - 1] - (*V)[i] > tol) ++st.stats.clipped;
                        (*V)[i] = (*V)[i - 1];
                    }
            return StepResult::Accepted;
        }
        ++st.stats.rejected;
        dt *= std::max(Real(0.2), 0.9L * std::pow(err, -order_exp));
    }
}

RunOutcome Solver::run(RadialState st, const std::function<void(const RadialState&)>& observer) {
    anchor(st);
    RunOutcome out;
    const Real H = c_.horizon;
    out.sup_u_initial = sup_density(st.s, st.U, p_.n);
    // identically zero data cannot blow up; no threshold then
    out.threshold = c_.u_max_threshold ? *c_.u_max_threshold
                    : out.sup_u_initial > 0 ? c_.u_max_factor * out.sup_u_initial
                                            : std::numeric_limits<Real>::infinity();
    const Real t_start = st.t;
    if (!(H > 0)) {
        out.kind = OutcomeKind::Bounded;
        out.t_end = st.t;
        out.final_state = std::move(st);
        out.message = "empty horizon";
        return out;
    }
    const Real interval = c_.output_interval > 0 ? c_.output_interval : H / 100;
    const Real t_final = t_start + H;
    out.series.push_back(diagnostics(st, p_, c_));
    Real next_out = std::min(t_start + interval, t_final);
    std::deque<Real> recent{out.sup_u_initial};
    auto finish = [&](OutcomeKind k, std::string msg) {
        out.kind = k;
        out.t_end = st.t;
        out.message = std::move(msg);
        if (out.series.empty() || out.series.back().t != st.t) out.series.push_back(diagnostics(st, p_, c_));
        out.final_state = st;
        return out;
    };
    while (st.t < t_final) {
        if (st.stats.accepted >= c_.max_steps) return finish(OutcomeKind::Error, "step budget exhausted");
        const StepResult r = step(st, next_out - st.t);
        if (r == StepResult::NonFinite) return finish(OutcomeKind::Error, "non-finite values; last good state kept");
        if (r == StepResult::Floor) {
            const Real grown = recent.back() / recent.front();
            if (recent.size() > 10 && grown >= 100)
                return finish(OutcomeKind::BlowUp, "step floor with sup u growing");
            return finish(OutcomeKind::StepFloor, "time step fell below the floor");
        }
        if (observer) observer(st);
        const Real su = sup_density(st.s, st.U, p_.n);
        recent.push_back(su);
        if (recent.size() > 11) recent.pop_front();
        if (su >= out.threshold) return finish(OutcomeKind::BlowUp, "sup u crossed the threshold");
        if (st.t >= next_out) {
            out.series.push_back(diagnostics(st, p_, c_));
            next_out = std::min(next_out + interval, t_final);
        }
    }
    RunOutcome res = finish(OutcomeKind::Bounded, "reached horizon");
    // growth of sup u over the last decade of the horizon
    const Real from = t_start + H / 10;
    std::optional<Real> base;
    Real peak = 0;
    for (const auto& d : res.series) {
        if (d.t + 1e-12L * H < from) continue;
        if (!base) base = d.sup_u;
        peak = std::max(peak, d.sup_u);
    }
    if (base && *base > 0) res.final_decade_growth = peak / *base - 1;
    return res;
}

InitialProfile gaussian_bump(const ModelParams& p, Real mass, Real width) {
    validate(p);
    if (!(mass > 0) || !(width > 0)) throw DomainError("gaussian bump needs positive mass and width");
    const Real h = Real(p.n) / 2;
    const Real k = 2 * width * width;
    const Real nn = p.n;
    // int_0^rho r^{n-1} e^{-r^2/k} dr = k^{n/2} Gamma(n/2) P(n/2, rho^2/k) / 2
    auto partial = [=](Real rho) { return std::pow(k, h) * std::tgamma(h) * boost::math::gamma_p(h, rho * rho / k) / 2; };
    const Real A = mass / (nn * ball_volume(p.n) * partial(p.R));
    InitialProfile prof;
    prof.density = [=](Real r) { return A * std::exp(-r * r / k); };
    prof.cumulative = [=](Real s) { return A * partial(std::pow(s, 1 / nn)); };
    return prof;
}

RunOutcome run(const ModelParams& p, const InitialProfile& u0, const InitialProfile& w0, const RunControls& c,
               const std::function<void(const RadialState&)>& observer) {
    const Real ext = mass_extent(p);
    const auto grid = make_grid(ext, c.N, c.s_min_rel * ext);
    Solver solver(p, c);
    return solver.run(initial_state(p, grid, u0, w0), observer);
}

}  // namespace kslab
