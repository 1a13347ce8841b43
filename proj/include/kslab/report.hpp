#pragma once

#include <iosfwd>

#include "kslab/io.hpp"
#include "kslab/operators.hpp"
#include "kslab/solver.hpp"

namespace kslab {

json to_json(const CertificateParams& cp);
CertificateParams certificate_from_json(const json& j);
json to_json(const CertificateReport& r);
json to_json(const RunOutcome& o);

// Columns t, sup_u, sup_w, mass_u, mass_w, dt, then lp_<p> and lq_<q>.
void write_series_csv(std::ostream& os, const std::vector<Diagnostics>& series, const RunControls& c);
// Columns s, U, W, u, w.
void write_snapshot_csv(std::ostream& os, const RadialState& st, int n);
// Columns r, M_u, M_w on equispaced radii.
void write_mass_table_csv(std::ostream& os, const CertificateParams& cp, int points);
// Columns s, t, P, Q on a coarse copy of the certify grid.
void write_operator_csv(std::ostream& os, const CertificateParams& cp, const ModelParams& p, int n_s, int n_t);

}  // namespace kslab
