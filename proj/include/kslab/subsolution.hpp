#pragma once

#include <functional>
#include <string>

#include "kslab/model.hpp"

namespace kslab {

// Intermediate thresholds kept for audit.
struct Thresholds {
    Real eta = 0;
    Real alpha_star = 0, beta_star = 0;
    Real delta_star = 0, gamma_star = 0, y_star = 0;
    Real delta_ss = 0, gamma_ss = 0;
    Real s1 = 0;        // mass-confinement radius
    Real s_cap_slope = 0, s_cap_balance = 0;
    Real s_sss = 0;     // inner taxis-dominance radius
    Real s_ssss = 0;    // signal-equation radius
    Real c1 = 0, c2 = 0;
    Real sup_D = 0, sup_S = 0;
    Real theta_star = 0, theta_ss = 0;
    Real T_s = 0;
};

struct CertificateParams {
    int n = 3;
    Real R = 1;
    Real mu_lo = 0, mu_hi = 0;
    Real a = 0;
    Real alpha = 0, beta = 0;
    Real delta = 0, gamma = 0, theta = 0;
    Real y0 = 0, T = 0;
    Real s0 = 0;
    Real T0 = 0, Tstar = 0;
    Thresholds audit;

    Real extent() const;  // R^n
};

Real coefficient_a(Real mu_lo, Real R, int n);

// y(t) = y0 (1 - gamma delta y0^delta t)^{-1/delta}
Real y_closed_form(Real t, Real gamma, Real delta, Real y0);
Real blowup_time(Real gamma, Real delta, Real y0);

struct Jet {
    Real value = 0, dt = 0, ds = 0, dss = 0;
};

enum class Side { Auto, Inner, Outer };

// Shape a y^{1-e} s (s <= 1/y), e^{-e} a (s - (1-e)/y)^e beyond, with exponent e.
Jet eval_shape(Real s, Real y, Real ydot, Real e, Real a, Side side = Side::Auto);

Jet eval_hU(Real s, Real t, const CertificateParams& cp, Side side = Side::Auto);
Jet eval_hW(Real s, Real t, const CertificateParams& cp, Side side = Side::Auto);

struct PairJet {
    Jet U, W;
};

// e^{-theta t} times the shapes.
PairJet eval_pair(Real s, Real t, const CertificateParams& cp, Side side = Side::Auto);

struct MassWindow {
    Real T0 = 0;
    std::string binding;  // "none", "z_lo1", "z_lo2" or "z_hi2"
};

inline constexpr Real kDefaultWindowCap = 1e6L;

MassWindow mass_window_T0(const ModelParams& p, Real M_lo, Real M_hi, Real cap = kDefaultWindowCap);

struct SelectionOptions {
    Real window_cap = kDefaultWindowCap;
    Real safety = 0.9L;
    int max_halvings = 200;
};

CertificateParams select_parameters(const ModelParams& p, Real M_lo, Real M_hi, Real Tstar,
                                    const SelectionOptions& opt = {});

// The six envelope inequalities on y(t), as lhs/rhs - 1 (nonpositive when satisfied).
struct EnvelopeMargins {
    Real vs_gamma_star, vs_l2, vs_gamma_ss, vs_square, vs_power, steepness;
};
EnvelopeMargins envelope_margins(Real t, const CertificateParams& cp, const ModelParams& p);

struct MassProfiles {
    std::function<Real(Real)> Mu, Mw;
};
MassProfiles mass_profiles(const CertificateParams& cp);

// Radial density with an optional exact cumulative in the mass coordinate,
// U(s) = int_0^{s^{1/n}} rho^{n-1} f(rho) drho.
struct InitialProfile {
    std::function<Real(Real)> density;
    std::function<Real(Real)> cumulative;
};

struct InitialData {
    InitialProfile u, w;
    Real c_u = 0, c_w = 0;
};

InitialData synthesize_initial_data(const CertificateParams& cp, Real target_mass, Real M_lo, Real M_hi);

}  // namespace kslab
