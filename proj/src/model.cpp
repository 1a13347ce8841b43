#include "kslab/model.hpp"

#include <algorithm>
#include <numbers>

namespace kslab {

void validate(const ModelParams& p) {
    if (p.n < 1) throw UnsupportedDimension("dimension n must be >= 1");
    if (!(p.R > 0)) throw DomainError("R must be positive");
    if (!(p.k1 >= 0) || !(p.k2 >= 0)) throw DomainError("k1, k2 must be nonnegative");
    if (!(p.l1 > 0) || !(p.l2 > 0)) throw DomainError("l1, l2 must be positive");
    if (!(p.d0 > 0)) throw DomainError("d0 must be positive");
    if (!(p.s0_coef >= 0)) throw DomainError("s0_coef must be nonnegative");
    if (!(p.xi0 > 0)) throw DomainError("xi0 must be positive");
    if (!std::isfinite(p.m) || !std::isfinite(p.sigma)) throw DomainError("m, sigma must be finite");
}

Envelope envelope(const ModelParams& p) {
    // (1+xi)^q / xi^q = (1+1/xi)^q lies between 1 and (1+1/xi0)^q for xi > xi0.
    const Real f = 1 + 1 / p.xi0;
    const Real fd = std::pow(f, p.m - 1);
    const Real fs = std::pow(f, p.sigma - 1);
    return {p.d0 * std::max<Real>(1, fd), p.d0 * std::min<Real>(1, fd),
            p.s0_coef * std::max<Real>(1, fs), p.s0_coef * std::min<Real>(1, fs)};
}

Real ball_volume(int n) {
    if (n < 1) throw UnsupportedDimension("dimension n must be >= 1");
    const Real h = static_cast<Real>(n) / 2;
    return std::pow(std::numbers::pi_v<Real>, h) / std::tgamma(h + 1);
}

Real mass_extent(const ModelParams& p) { return std::pow(p.R, static_cast<Real>(p.n)); }

Real domain_volume(const ModelParams& p) { return ball_volume(p.n) * mass_extent(p); }

Real diffusion_line(int n, Real m) { return m - 1 + Real(4) / n; }
Real sensitivity_line(int n) { return Real(2) / n; }

bool satisfies_kl2(const ModelParams& p) { return p.k2 * p.l2 <= p.k1 * p.l1; }

std::string RegimeSet::to_string() const {
    static constexpr std::pair<Regime, const char*> names[] = {
        {Regime::Supercritical, "Supercritical"},
        {Regime::SubcriticalDiffusion, "SubcriticalDiffusion"},
        {Regime::SubcriticalSensitivity, "SubcriticalSensitivity"},
        {Regime::Critical, "Critical"},
    };
    std::string out;
    for (auto [r, name] : names) {
        if (!has(r)) continue;
        if (!out.empty()) out += '|';
        out += name;
    }
    return out;
}

RegimeSet regime_classify(const ModelParams& p) {
    if (p.n < 3) throw UnsupportedDimension("regime classification needs n >= 3");
    const Real ld = diffusion_line(p.n, p.m);
    const Real ls = sensitivity_line(p.n);
    const Real tol = kCriticalTolerance;
    RegimeSet out;
    if (p.sigma > ld + tol && p.sigma > ls + tol) out.insert(Regime::Supercritical);
    if (p.sigma < ld - tol) out.insert(Regime::SubcriticalDiffusion);
    if (p.sigma < ls - tol) out.insert(Regime::SubcriticalSensitivity);
    if (std::abs(p.sigma - ld) <= tol || std::abs(p.sigma - ls) <= tol) out.insert(Regime::Critical);
    return out;
}

Prediction predict(const RegimeSet& labels) {
    if (labels.has(Regime::Supercritical)) return Prediction::BlowUp;
    if (labels.has(Regime::SubcriticalDiffusion) || labels.has(Regime::SubcriticalSensitivity))
        return Prediction::NoBlowUp;
    return Prediction::None;
}

const char* to_string(Prediction p) {
    switch (p) {
        case Prediction::BlowUp: return "blowup";
        case Prediction::NoBlowUp: return "no_blowup";
        case Prediction::None: return "none";
    }
    return "none";
}

}  // namespace kslab
