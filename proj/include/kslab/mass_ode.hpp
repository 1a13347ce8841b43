#pragma once

#include <utility>

#include "kslab/model.hpp"

namespace kslab {

struct Vec2 {
    Real x = 0, y = 0;
};

struct Mat2 {
    Real a11 = 0, a12 = 0, a21 = 0, a22 = 0;
    Vec2 operator*(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
};

// Means (mu_u, mu_w) obey z' = A z with A = [[-k1, k2], [l2, -l1]].
Mat2 rate_matrix(const ModelParams& p);

// Closed-form exp(A t) for any real 2x2 matrix.
Mat2 expm(const Mat2& A, Real t);

// Eigenvalues (larger first); throws DomainError if complex.
std::pair<Real, Real> real_eigenvalues(const Mat2& A);

// Nonnegative left eigenvector for the larger eigenvalue of the rate matrix,
// normalised to unit sum. v^T z(t) = exp(r t) v^T z(0).
Vec2 left_perron_vector(const ModelParams& p);

Vec2 mass_ode(Real t, const ModelParams& p, Vec2 z0);

}  // namespace kslab
