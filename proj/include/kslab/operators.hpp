#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kslab/model.hpp"
#include "kslab/subsolution.hpp"

namespace kslab {

struct OperatorValue {
    Real value = 0;
    Real scale = 0;  // sum of absolute values of the individual terms
};

// phi_t - n^2 s^{2-2/n} D(n phi_s) phi_ss - S(n phi_s)(psi - mu_hi s / n) + k1 phi
OperatorValue apply_P(Real s, const Jet& phi, const Jet& psi, Real mu_hi, const ModelParams& p);
// psi_t - n^2 s^{2-2/n} psi_ss + l1 psi - l2 phi
OperatorValue apply_Q(Real s, const Jet& phi, const Jet& psi, const ModelParams& p);

struct CertifyGrid {
    int n_s = 300;
    int n_t = 300;
    Real kink_band = 1e-9L;      // relative band around s = 1/y(t) left out
    Real t_clamp = 1e-6L;        // last slice at (1 - t_clamp) T
    Real inner_depth = 1e-12L;   // inner slice starts at inner_depth / y(t)
    Real rel_tol = 1e-9L;
    Real abs_tol = 0;
    int workers = 1;
};

struct RegionMax {
    Real ratio = -INFINITY;  // value / scale at the worst point
    Real value = 0, scale = 0, s = 0, t = 0;
    bool any = false;
};

struct CheckResult {
    std::string name;
    Real worst = -INFINITY;  // positive means violated
    Real t = 0;
    bool ok = true;
};

struct CertificateReport {
    int n_s = 0, n_t = 0;
    std::string spacing;
    Real tolerance_rel = 0, tolerance_abs = 0;
    RegionMax P_inner, P_outer, Q_inner, Q_outer;
    std::vector<CheckResult> checks;  // boundary values, envelopes, time ordering
    std::vector<std::string> failures;
    bool pass = false;
};

CertificateReport certify(const CertificateParams& cp, const ModelParams& p, const CertifyGrid& grid = {});

// Numerical solution on an s-grid at a sequence of times.
struct GriddedSolution {
    std::vector<Real> s;
    struct Frame {
        Real t = 0;
        std::vector<Real> U, W;
    };
    std::vector<Frame> frames;
};

struct ComparisonReport {
    bool initial_ok = true;
    bool lateral_ok = true;
    bool conclusion_ok = true;
    Real min_margin = INFINITY;  // min (U - U_lower) / scale
    Real min_margin_w = INFINITY;
    Real scale = 0;
    Real tolerance = 0;
    std::optional<std::pair<Real, Real>> first_violation;  // (s, t)
    bool ok() const { return initial_ok && lateral_ok && conclusion_ok; }
};

// Checks initial and lateral ordering against the subsolution, then U >= U_lower
// at the given points (default: the solution grid), interpolating linearly in s.
ComparisonReport comparison_hypotheses_check(const CertificateParams& cp, const GriddedSolution& upper,
                                             Real rel_tol = 1e-6L,
                                             const std::vector<Real>* points = nullptr);

}  // namespace kslab
