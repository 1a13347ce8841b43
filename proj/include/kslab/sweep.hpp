#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kslab/io.hpp"
#include "kslab/operators.hpp"
#include "kslab/solver.hpp"

namespace kslab {

struct MassBounds {
    Real M_lo = 1, M_hi = 2, Tstar = 1e6L;
    Real window_cap = kDefaultWindowCap;

    CertificateParams select(const ModelParams& p) const;
};

enum class DataKind { Auto, Subsolution, Gaussian };
const char* to_string(DataKind k);

struct CanonicalConfig {
    MassBounds masses;
    RunControls controls;
    DataKind data = DataKind::Auto;
    Real blowup_horizon_multiplier = 1;   // subsolution runs also stop at multiplier * T
    Real bump_width = 0.2L;               // in units of R
    std::optional<Real> target_mass;      // default (M_lo + M_hi) / 2
};

struct CanonicalRun {
    RunOutcome outcome;
    std::optional<CertificateParams> certificate;
    DataKind data = DataKind::Gaussian;
};

// Subsolution-dominating data when supercritical (Auto), Gaussian bump otherwise.
// For subsolution data the grid starts at 1e-9 / y0 and the step floor is lifted.
CanonicalRun run_canonical(const ModelParams& p, const CanonicalConfig& cfg,
                           const std::function<void(const RadialState&)>& observer = {});

// Coarser than the library defaults: N = 256, rtol = 1e-4, horizon 10.
CanonicalConfig sweep_run_defaults();

enum class SweepMode { Simulate, Certify, Both };
const char* to_string(SweepMode m);
SweepMode sweep_mode_from(const std::string& s);

struct SweepConfig {
    ModelParams base;
    Real m_min = -1, m_max = 2;
    int m_count = 9;
    Real sigma_min = 0, sigma_max = 2.5L;
    int sigma_count = 9;
    SweepMode mode = SweepMode::Both;
    Real margin = 0.25L;
    CanonicalConfig run = sweep_run_defaults();
    CertifyGrid cert;
    int workers = 1;
};

void validate(const SweepConfig& cfg);

enum class Observed { BlowUp, Bounded, Undecided };
const char* to_string(Observed o);

struct Classification {
    Real m = 0, sigma = 0;
    RegimeSet labels;
    Prediction predicted = Prediction::None;
    std::optional<bool> certificate_pass;
    std::optional<OutcomeKind> simulation;
    Observed observed = Observed::Undecided;
    Real t_end = 0;   // blow-up time, certificate T, or horizon
    Real sup_u_final = 0;
    bool eligible = false;
    bool agrees = false;
    std::string note;
};

// Distances in the (m, sigma) plane to sigma = m-1+4/n and sigma = 2/n.
Real distance_to_diffusion_line(int n, Real m, Real sigma);
Real distance_to_sensitivity_line(int n, Real sigma);

Classification classify_point(Real m, Real sigma, const SweepConfig& cfg);

struct SweepSummary {
    int points = 0;
    int eligible = 0;
    int agreeing = 0;
    std::optional<Real> agreement;  // undefined with no eligible points
    int monotonicity_violations = 0;
};

struct SweepResult {
    std::vector<Classification> rows;
    SweepSummary summary;
};

// Rows are m-major. Along each m, a bounded outcome above a blow-up in sigma counts once.
int monotonicity_violations(const std::vector<Classification>& rows, int m_count, int sigma_count);

SweepResult run_sweep(const SweepConfig& cfg);

inline constexpr const char* kPhaseHeader =
    "m,sigma,regime_labels,certificate_pass,outcome,t_blowup_or_horizon,sup_u_final,agreement_eligible,agrees";

void write_phase_csv(std::ostream& os, const SweepResult& r);
void write_line_equations(std::ostream& os, int n);
json summary_json(const SweepResult& r);

}  // namespace kslab
