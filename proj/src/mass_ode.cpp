#include "kslab/mass_ode.hpp"

#include <cmath>

namespace kslab {

Mat2 rate_matrix(const ModelParams& p) { return {-p.k1, p.k2, p.l2, -p.l1}; }

Mat2 expm(const Mat2& A, Real t) {
    // A = mI + B with tr B = 0, so B^2 = q2 I.
    const Real m = (A.a11 + A.a22) / 2;
    const Mat2 B{A.a11 - m, A.a12, A.a21, A.a22 - m};
    const Real q2 = B.a11 * B.a11 + B.a12 * B.a21;
    Real c, sh;  // e^{mt} cosh(qt) and e^{mt} sinh(qt)/q
    if (q2 > 0) {
        const Real q = std::sqrt(q2);
        if (q * std::abs(t) < 1) {
            const Real em = std::exp(m * t);
            c = em * std::cosh(q * t);
            sh = em * std::sinh(q * t) / q;
        } else {
            const Real ep = std::exp((m + q) * t), en = std::exp((m - q) * t);
            c = (ep + en) / 2;
            sh = (ep - en) / (2 * q);
        }
    } else if (q2 < 0) {
        const Real w = std::sqrt(-q2);
        const Real em = std::exp(m * t);
        c = em * std::cos(w * t);
        sh = em * std::sin(w * t) / w;
    } else {
        const Real em = std::exp(m * t);
        c = em;
        sh = em * t;
    }
    return {c + sh * B.a11, sh * B.a12, sh * B.a21, c + sh * B.a22};
}

std::pair<Real, Real> real_eigenvalues(const Mat2& A) {
    const Real m = (A.a11 + A.a22) / 2;
    const Real d = A.a11 - A.a22;
    const Real disc = d * d / 4 + A.a12 * A.a21;
    if (disc < 0) throw DomainError("rate matrix has complex eigenvalues");
    const Real q = std::sqrt(disc);
    return {m + q, m - q};
}

Vec2 left_perron_vector(const ModelParams& p) {
    const Mat2 A = rate_matrix(p);
    const Real r = real_eigenvalues(A).first;
    // v1 (-k1 - r) + v2 l2 = 0 and l2 > 0.
    Vec2 v{1, (r + p.k1) / p.l2};
    if (v.y < 0) v.y = 0;  // roundoff when r == -k1
    const Real s = v.x + v.y;
    return {v.x / s, v.y / s};
}

Vec2 mass_ode(Real t, const ModelParams& p, Vec2 z0) {
    if (!(t >= 0)) throw DomainError("mass_ode: negative time");
    return expm(rate_matrix(p), t) * z0;
}

}  // namespace kslab
