#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kslab/types.hpp"

namespace kslab {

using json = nlohmann::json;

// 17 significant digits, scientific.
std::string sci(Real x);

// Finite values inside double range become JSON numbers, anything else a
// decimal string with 21 significant digits.
json to_json_real(Real x);
Real real_from_json(const json& j);

// '#'-prefixed provenance lines: tool, subcommand, resolved config on one line.
void write_provenance(std::ostream& os, const std::string& subcommand, const json& config);

void write_csv_row(std::ostream& os, const std::vector<Real>& values);

}  // namespace kslab
