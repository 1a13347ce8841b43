#include <doctest.h>

#include <cmath>
#include <random>

#include "kslab/mass_ode.hpp"

using namespace kslab;

namespace {

// Taylor series with scaling and squaring as an independent oracle.
Mat2 expm_series(const Mat2& A, Real t) {
    int sq = 0;
    Real norm = std::max(std::abs(A.a11) + std::abs(A.a12), std::abs(A.a21) + std::abs(A.a22)) * std::abs(t);
    while (norm > 0.5L) {
        norm /= 2;
        ++sq;
    }
    const Real h = t / std::pow(Real(2), sq);
    Mat2 X{A.a11 * h, A.a12 * h, A.a21 * h, A.a22 * h};
    Mat2 E{1, 0, 0, 1}, term{1, 0, 0, 1};
    for (int k = 1; k < 30; ++k) {
        term = {(term.a11 * X.a11 + term.a12 * X.a21) / k, (term.a11 * X.a12 + term.a12 * X.a22) / k,
                (term.a21 * X.a11 + term.a22 * X.a21) / k, (term.a21 * X.a12 + term.a22 * X.a22) / k};
        E = {E.a11 + term.a11, E.a12 + term.a12, E.a21 + term.a21, E.a22 + term.a22};
    }
    for (int i = 0; i < sq; ++i)
        E = {E.a11 * E.a11 + E.a12 * E.a21, E.a11 * E.a12 + E.a12 * E.a22, E.a21 * E.a11 + E.a22 * E.a21,
             E.a21 * E.a12 + E.a22 * E.a22};
    return E;
}

}  // namespace

TEST_SUITE("mass_ode") {

TEST_CASE("symmetric rates keep equal means fixed") {
    ModelParams p;
    for (Real t : {0.0L, 1.0L, 1e3L, 1e6L}) {
        const Vec2 z = mass_ode(t, p, {0.7L, 0.7L});
        CHECK(static_cast<double>(std::abs(z.x / 0.7L - 1)) < 1e-15);
        CHECK(static_cast<double>(std::abs(z.y / 0.7L - 1)) < 1e-15);
    }
}

TEST_CASE("closed form matches the series oracle") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 300; ++k) {
        const Mat2 A{u(rng), u(rng), u(rng), u(rng)};
        const Real t = std::abs(u(rng)) * 3;
        const Mat2 E = expm(A, t), F = expm_series(A, t);
        const Real scale = std::abs(F.a11) + std::abs(F.a12) + std::abs(F.a21) + std::abs(F.a22);
        const Real err = std::abs(E.a11 - F.a11) + std::abs(E.a12 - F.a12) + std::abs(E.a21 - F.a21) +
                         std::abs(E.a22 - F.a22);
        REQUIRE(static_cast<double>(err / scale) < 1e-14);
    }
}

TEST_CASE("degenerate and rotation cases") {
    const Mat2 J{-1, 1, 0, -1};  // defective
    const Mat2 E = expm(J, 2);
    CHECK(static_cast<double>(E.a12) == doctest::Approx(2 * std::exp(-2.0)).epsilon(1e-15));
    const Mat2 Rot{0, 1, -1, 0};
    const Mat2 Q = expm(Rot, M_PI / 2);
    CHECK(static_cast<double>(std::abs(Q.a11)) < 1e-15);
    CHECK(static_cast<double>(Q.a12) == doctest::Approx(1).epsilon(1e-15));
}

TEST_CASE("eigenvalues by the quadratic formula") {
    ModelParams p;
    p.k1 = 1;
    p.k2 = 3;
    p.l1 = 2;
    p.l2 = 1;
    const auto [r1, r2] = real_eigenvalues(rate_matrix(p));
    // A = [[-1, 3], [1, -2]]: tr = -3, det = -1
    const double disc = std::sqrt(9.0 + 4.0);
    CHECK(static_cast<double>(r1) == doctest::Approx((-3 + disc) / 2).epsilon(1e-15));
    CHECK(static_cast<double>(r2) == doctest::Approx((-3 - disc) / 2).epsilon(1e-15));
    CHECK(r1 > 0);  // k2 l2 > k1 l1
    CHECK_THROWS_AS(real_eigenvalues(Mat2{0, 1, -1, 0}), DomainError);
}

TEST_CASE("kl2 gives nonpositive eigenvalues and bounded means") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 3);
    for (int k = 0; k < 200; ++k) {
        ModelParams p;
        p.k1 = u(rng);
        p.l1 = u(rng);
        p.k2 = u(rng);
        p.l2 = u(rng);
        const auto [r1, r2] = real_eigenvalues(rate_matrix(p));
        CHECK(r2 <= r1);
        if (satisfies_kl2(p)) {
            CHECK(r1 <= 1e-15L);
            const Vec2 z = mass_ode(100, p, {1, 1});
            CHECK(static_cast<double>(z.x + z.y) < 1e3);
        } else {
            CHECK(r1 > 0);
        }
    }
}

TEST_CASE("left Perron vector is invariant in the exponential sense") {
    ModelParams p;
    p.k1 = 0.5L;
    p.k2 = 2;
    p.l1 = 1.5L;
    p.l2 = 0.3L;
    const Vec2 v = left_perron_vector(p);
    CHECK(v.x >= 0);
    CHECK(v.y >= 0);
    CHECK(static_cast<double>(v.x + v.y) == doctest::Approx(1).epsilon(1e-15));
    const Real r = real_eigenvalues(rate_matrix(p)).first;
    const Vec2 z0{0.3L, 1.7L};
    const Vec2 z = mass_ode(4, p, z0);
    const Real lhs = v.x * z.x + v.y * z.y, rhs = std::exp(r * 4) * (v.x * z0.x + v.y * z0.y);
    CHECK(static_cast<double>(std::abs(lhs / rhs - 1)) < 1e-14);
}

TEST_CASE("mass_ode solves the ODE") {
    ModelParams p;
    p.k1 = 0.2L;
    p.k2 = 1.1L;
    p.l1 = 0.4L;
    p.l2 = 0.9L;
    const Vec2 z0{1, 2};
    const Real t = 1.3L, h = 1e-5L;
    const Vec2 a = mass_ode(t + h, p, z0), b = mass_ode(t - h, p, z0), z = mass_ode(t, p, z0);
    const Vec2 d = rate_matrix(p) * z;
    CHECK(static_cast<double>(std::abs((a.x - b.x) / (2 * h) / d.x - 1)) < 1e-8);
    CHECK(static_cast<double>(std::abs((a.y - b.y) / (2 * h) / d.y - 1)) < 1e-8);
}

}  // TEST_SUITE
