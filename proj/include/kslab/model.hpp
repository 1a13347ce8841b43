#pragma once

#include <cmath>
#include <string>

#include "kslab/types.hpp"

namespace kslab {

struct ModelParams {
    int n = 3;
    Real R = 1;
    Real k1 = 1, k2 = 1, l1 = 1, l2 = 1;
    Real m = 1;
    Real sigma = 2;
    Real d0 = 1;
    Real s0_coef = 1;
    Real xi0 = 1;
};

// Constants with kD xi^{m-1} <= D(xi) <= KD xi^{m-1} and
// kS xi^sigma <= S(xi) <= KS xi^sigma for xi > xi0.
struct Envelope {
    Real KD, kD, KS, kS;
};

void validate(const ModelParams& p);
Envelope envelope(const ModelParams& p);

inline Real diffusivity(Real xi, const ModelParams& p) {
    if (!(xi >= 0)) throw DomainError("diffusivity: negative density");
    return p.d0 * std::pow(1 + xi, p.m - 1);
}

inline Real sensitivity(Real xi, const ModelParams& p) {
    if (!(xi >= 0)) throw DomainError("sensitivity: negative density");
    if (xi == 0) return 0;
    return p.s0_coef * xi * std::pow(1 + xi, p.sigma - 1);
}

// dS/dxi
inline Real sensitivity_slope(Real xi, const ModelParams& p) {
    if (!(xi >= 0)) throw DomainError("sensitivity_slope: negative density");
    return p.s0_coef * std::pow(1 + xi, p.sigma - 2) * (1 + p.sigma * xi);
}

Real ball_volume(int n);
Real domain_volume(const ModelParams& p);
// R^n, the extent of the mass coordinate.
Real mass_extent(const ModelParams& p);

// Critical lines of the (m, sigma) plane.
Real diffusion_line(int n, Real m);
Real sensitivity_line(int n);
bool satisfies_kl2(const ModelParams& p);

enum class Regime : unsigned {
    Supercritical = 1u,
    SubcriticalDiffusion = 2u,
    SubcriticalSensitivity = 4u,
    Critical = 8u,
};

class RegimeSet {
public:
    void insert(Regime r) { bits_ |= static_cast<unsigned>(r); }
    bool has(Regime r) const { return (bits_ & static_cast<unsigned>(r)) != 0; }
    bool empty() const { return bits_ == 0; }
    unsigned bits() const { return bits_; }
    bool operator==(const RegimeSet&) const = default;
    // '|'-joined labels in declaration order, e.g. "SubcriticalDiffusion|SubcriticalSensitivity".
    std::string to_string() const;

private:
    unsigned bits_ = 0;
};

inline constexpr Real kCriticalTolerance = 1e-12L;

RegimeSet regime_classify(const ModelParams& p);

enum class Prediction { BlowUp, NoBlowUp, None };
Prediction predict(const RegimeSet& labels);
const char* to_string(Prediction p);

}  // namespace kslab
