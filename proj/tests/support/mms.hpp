#pragma once

// Manufactured solution shared by the unit tests and the acceptance runner.
// U = e^{-t} (s + s^2) / 2 and W = e^{-t} (s + s^3) / 2 are curved in s, so the
// spatial discretization error does not vanish identically.

#include <algorithm>
#include <cmath>

#include "kslab/solver.hpp"

namespace kslab::mms {

struct Exact {
    static Real U(Real s, Real t) { return std::exp(-t) * (s + s * s) / 2; }
    static Real Us(Real s, Real t) { return std::exp(-t) * (1 + 2 * s) / 2; }
    static Real Uss(Real, Real t) { return std::exp(-t); }
    static Real W(Real s, Real t) { return std::exp(-t) * (s + s * s * s) / 2; }
    static Real Ws(Real s, Real t) { return std::exp(-t) * (1 + 3 * s * s) / 2; }
    static Real Wss(Real s, Real t) { return std::exp(-t) * 3 * s; }
};

inline SolverHooks hooks(const ModelParams& p) {
    const Real ext = mass_extent(p), nn = p.n;
    SolverHooks h;
    h.boundary = [ext](Real t) { return Vec2{Exact::U(ext, t), Exact::W(ext, t)}; };
    h.force_u = [p, ext, nn](Real s, Real t) {
        const Real w = nn * nn * std::pow(s, 2 - 2 / nn);
        const Real xi = nn * Exact::Us(s, t);
        const Real mu_w = nn * Exact::W(ext, t) / ext;
        const Real rhs = w * diffusivity(xi, p) * Exact::Uss(s, t) +
                         sensitivity(xi, p) * (Exact::W(s, t) - mu_w * s / nn) - p.k1 * Exact::U(s, t) +
                         p.k2 * Exact::W(s, t);
        return -Exact::U(s, t) - rhs;
    };
    h.force_w = [p, nn](Real s, Real t) {
        const Real w = nn * nn * std::pow(s, 2 - 2 / nn);
        const Real rhs = w * Exact::Wss(s, t) - p.l1 * Exact::W(s, t) + p.l2 * Exact::U(s, t);
        return -Exact::W(s, t) - rhs;
    };
    return h;
}

struct Result {
    Real error = 0;  // max nodal |U - U_exact| + |W - W_exact| relative to the sup of the exact pair
    long steps = 0;
};

inline Result run(const ModelParams& p, int N, Real horizon, Real rtol, Real s_min_rel = 1e-8L) {
    RunControls c;
    c.N = N;
    c.horizon = horizon;
    c.rtol = rtol;
    c.atol = rtol;
    c.s_min_rel = s_min_rel;
    c.u_max_factor = 1e30L;
    const Real ext = mass_extent(p);
    const auto grid = make_grid(ext, N, s_min_rel * ext);
    RadialState st;
    st.s = grid;
    for (Real s : grid) {
        st.U.push_back(Exact::U(s, 0));
        st.W.push_back(Exact::W(s, 0));
    }
    st.mu_u = p.n * st.U.back() / ext;
    st.mu_w = p.n * st.W.back() / ext;
    Solver solver(p, c, hooks(p));
    const RunOutcome o = solver.run(st);
    const RadialState& f = o.final_state;
    Real err = 0, scale = 0;
    for (std::size_t i = 0; i < f.s.size(); ++i) {
        err = std::max(err, std::abs(f.U[i] - Exact::U(f.s[i], f.t)) + std::abs(f.W[i] - Exact::W(f.s[i], f.t)));
        scale = std::max(scale, std::abs(Exact::U(f.s[i], f.t)) + std::abs(Exact::W(f.s[i], f.t)));
    }
    return {err / scale, f.stats.accepted};
}

}  // namespace kslab::mms
