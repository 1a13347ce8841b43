#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kslab/mass_ode.hpp"
#include "kslab/model.hpp"
#include "kslab/subsolution.hpp"

namespace kslab {

// Node 0 at s = 0, then N-1 nodes geometric from s_min to R^n.
std::vector<Real> make_grid(Real extent, int N, Real s_min);

enum class Integrator { Imex, Explicit };

struct RunControls {
    int N = 512;
    Real s_min_rel = 1e-8L;            // first positive node, relative to R^n
    Real rtol = 1e-6L;
    Real atol = 1e-10L;                // density units; weighted by s_i in the error norm
    Real horizon = 1;
    std::optional<Real> dt_floor;      // default 1e-14 * horizon
    std::optional<Real> dt_initial;
    Real u_max_factor = 1e6L;
    std::optional<Real> u_max_threshold;
    Real cfl = 0.4L;
    Integrator integrator = Integrator::Imex;
    Real output_interval = 0;          // 0: horizon / 100
    long max_steps = 2'000'000;
    std::vector<Real> p_exponents{2};
    std::vector<Real> q_exponents{2};

    Real floor() const { return dt_floor ? *dt_floor : 1e-14L * horizon; }
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    long clipped = 0;
};

struct RadialState {
    std::vector<Real> s, U, W;
    Real t = 0;
    Real mu_u = 0, mu_w = 0;
    Real dt = 0;
    StepStats stats;
};

// Optional manufactured-solution plumbing.
struct SolverHooks {
    std::function<Real(Real s, Real t)> force_u, force_w;
    std::function<Vec2(Real t)> boundary;  // (U(R^n,t), W(R^n,t)); default from the mass ODE
};

struct Diagnostics {
    Real t = 0;
    Real sup_u = 0, sup_w = 0;
    Real mass_u = 0, mass_w = 0;
    Real mass_u_nodal = 0, mass_w_nodal = 0;  // trapezoid of the reconstructed nodal densities
    Real dt = 0;
    std::vector<Real> lp;  // int (u+1)^p dx
    std::vector<Real> lq;  // int w^q dx
};

enum class OutcomeKind { BlowUp, Bounded, StepFloor, Error };
const char* to_string(OutcomeKind k);

struct RunOutcome {
    OutcomeKind kind = OutcomeKind::Error;
    Real t_end = 0;
    Real sup_u_initial = 0;
    Real threshold = 0;
    std::vector<Diagnostics> series;
    RadialState final_state;
    std::string message;
    // sup u over [horizon/10, horizon] relative to its value at horizon/10, minus 1
    std::optional<Real> final_decade_growth;
};

RadialState initial_state(const ModelParams& p, const std::vector<Real>& grid, const InitialProfile& u0,
                          const InitialProfile& w0);

// Nodal densities u = n U_s from second-order differences.
std::vector<Real> nodal_density(const std::vector<Real>& s, const std::vector<Real>& V, int n);

Diagnostics diagnostics(const RadialState& st, const ModelParams& p, const RunControls& c);

class Solver {
public:
    Solver(ModelParams p, RunControls c, SolverHooks hooks = {});

    enum class StepResult { Accepted, Floor, NonFinite };
    // One adaptive step of at most `limit` in time.
    StepResult step(RadialState& st, Real limit);

    RunOutcome run(RadialState st, const std::function<void(const RadialState&)>& observer = {});

    // Boundary data (U(R^n,t), W(R^n,t)).
    Vec2 boundary(Real t) const;
    // Start the mass ODE from the means of `st` at time st.t.
    void anchor(const RadialState& st);
    const ModelParams& model() const { return p_; }
    const RunControls& controls() const { return c_; }

private:
    void explicit_part(const RadialState& st, Real t, std::vector<Real>& eu, std::vector<Real>& ew,
                       std::vector<Real>& du, Real* speed_cap) const;
    struct Parts {
        std::vector<Real> eu, ew, du;
    };
    void imex_euler(const RadialState& in, Real t, Real h, RadialState& out, const Parts* given = nullptr) const;
    void rk_rhs(const RadialState& st, Real t, std::vector<Real>& fu, std::vector<Real>& fw) const;
    Real error_norm(const RadialState& a, const RadialState& b) const;
    Real stability_cap(const RadialState& st, Real t, Parts& parts) const;

    ModelParams p_;
    RunControls c_;
    SolverHooks hooks_;
    Vec2 z0_;
    Real t0_ = 0;
    bool anchored_ = false;
    Real extent_;
    std::vector<Real> w_;  // n^2 s^{2-2/n}
};

// u(r) = A exp(-r^2 / (2 width^2)) with total mass `mass`; exact cumulative.
InitialProfile gaussian_bump(const ModelParams& p, Real mass, Real width);

RunOutcome run(const ModelParams& p, const InitialProfile& u0, const InitialProfile& w0, const RunControls& c,
               const std::function<void(const RadialState&)>& observer = {});

}  // namespace kslab
