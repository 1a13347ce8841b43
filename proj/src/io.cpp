#include "kslab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>

namespace kslab {

std::string sci(Real x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16Le", x);
    return buf;
}

json to_json_real(Real x) {
    const Real ax = std::abs(x);
    if (std::isfinite(x) && (ax == 0 || (ax < Real(std::numeric_limits<double>::max()) &&
                                         ax > Real(std::numeric_limits<double>::min()))))
        return static_cast<double>(x);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.21Lg", x);
    return std::string(buf);
}

Real real_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        char* end = nullptr;
        const Real v = std::strtold(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') throw ConfigError("not a number: " + s);
        return v;
    }
    throw ConfigError("expected a number, got " + j.dump());
}

void write_provenance(std::ostream& os, const std::string& subcommand, const json& config) {
    os << "# kslab " << subcommand << "\n# config " << config.dump() << "\n";
}

void write_csv_row(std::ostream& os, const std::vector<Real>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << sci(values[i]);
    os << "\n";
}

}  // namespace kslab
