#pragma once

#include <optional>
#include <string>

#include "kslab/io.hpp"
#include "kslab/sweep.hpp"

namespace kslab {

struct MassTableConfig {
    int points = 101;  // equispaced radii on [0, R]
};

struct RunConfig {
    ModelParams model;
    std::optional<MassBounds> masses;
    RunControls solver;
    DataKind initial_kind = DataKind::Auto;
    std::optional<Real> initial_mass;
    Real bump_width = 0.2L;
    Real blowup_horizon_multiplier = 1;
    CertifyGrid certify;
    bool dump_operator_csv = false;  // s, t, P, Q on a coarse grid
    SweepConfig sweep;  // its base model and masses are filled from the sections above
    MassTableConfig masses_table;
    std::string out_dir = ".";
    bool snapshot = false;  // final (s, U, W, u, w) profile
};

// Unknown keys, wrong types and out-of-range values raise ConfigError.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);

// Every field with its resolved value, for provenance headers.
json to_json(const RunConfig& cfg);

const MassBounds& require_masses(const RunConfig& cfg);
CanonicalConfig canonical_from(const RunConfig& cfg);

}  // namespace kslab

namespace kslab {

// Test hook. "key=value" sets a certificate field, "key*=factor" scales it.
// Keys: theta, gamma, delta, y0, a. T is recomputed after gamma, delta or y0 change.
void apply_tamper(CertificateParams& cp, const std::string& assignment);

}  // namespace kslab
