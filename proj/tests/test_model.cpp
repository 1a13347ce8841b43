#include <doctest.h>

#include <cmath>
#include <random>

#include "kslab/model.hpp"

using namespace kslab;

TEST_SUITE("model") {

TEST_CASE("diffusivity oracles") {
    ModelParams p;
    p.m = 1;
    CHECK(diffusivity(0, p) == doctest::Approx(1));
    p.m = 2;
    p.d0 = 2;
    CHECK(static_cast<double>(diffusivity(3, p)) == doctest::Approx(8).epsilon(1e-15));
    p.m = 0.5L;
    p.d0 = 1;
    CHECK(static_cast<double>(diffusivity(1e4L, p)) == doctest::Approx(9.9995000374968752e-3).epsilon(1e-12));
}

TEST_CASE("sensitivity oracles") {
    ModelParams p;
    for (Real sg : {-1.0L, 0.0L, 1.0L, 2.0L, 3.5L}) {
        p.sigma = sg;
        CHECK(sensitivity(0, p) == 0);
    }
    p.sigma = 1;
    CHECK(sensitivity(1, p) == 1);
    p.sigma = 2;
    CHECK(sensitivity(99, p) == 9900);
}

TEST_CASE("negative density is a domain error") {
    ModelParams p;
    CHECK_THROWS_AS(diffusivity(-1e-300L, p), DomainError);
    CHECK_THROWS_AS(sensitivity(-1, p), DomainError);
    CHECK_THROWS_AS(sensitivity_slope(-1, p), DomainError);
    CHECK_THROWS_AS(sensitivity(NAN, p), DomainError);
}

TEST_CASE("sensitivity slope matches a central difference") {
    ModelParams p;
    for (Real sg : {-0.5L, 0.3L, 2.0L}) {
        p.sigma = sg;
        for (Real xi : {0.01L, 1.0L, 37.0L}) {
            const Real h = 1e-6L * xi;
            const Real fd = (sensitivity(xi + h, p) - sensitivity(xi - h, p)) / (2 * h);
            CHECK(static_cast<double>(std::abs(fd / sensitivity_slope(xi, p) - 1)) < 1e-8);
        }
    }
}

TEST_CASE("validation rejects out-of-range parameters") {
    auto bad = [](auto mutate) {
        ModelParams p;
        mutate(p);
        return p;
    };
    CHECK_NOTHROW(validate(ModelParams{}));
    CHECK_THROWS_AS(validate(bad([](ModelParams& p) { p.l1 = 0; })), DomainError);
    CHECK_THROWS_AS(validate(bad([](ModelParams& p) { p.l2 = 0; })), DomainError);
    CHECK_THROWS_AS(validate(bad([](ModelParams& p) { p.k1 = -1; })), DomainError);
    CHECK_THROWS_AS(validate(bad([](ModelParams& p) { p.R = 0; })), DomainError);
    CHECK_THROWS_AS(validate(bad([](ModelParams& p) { p.d0 = 0; })), DomainError);
    CHECK_THROWS_AS(validate(bad([](ModelParams& p) { p.s0_coef = -1; })), DomainError);
    CHECK_THROWS_AS(validate(bad([](ModelParams& p) { p.xi0 = 0; })), DomainError);
    CHECK_NOTHROW(validate(bad([](ModelParams& p) { p.k1 = p.k2 = 0; })));
}

TEST_CASE("envelopes hold on a log grid beyond 2 xi0") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> um(-3, 3), us(-1, 4), ux(0.1, 5);
    for (int trial = 0; trial < 50; ++trial) {
        ModelParams p;
        p.m = um(rng);
        p.sigma = us(rng);
        p.xi0 = ux(rng);
        p.d0 = 0.5L + trial % 3;
        const Envelope e = envelope(p);
        for (int k = 0; k <= 400; ++k) {
            const Real xi = 2 * p.xi0 * std::pow(Real(1e8) / (2 * p.xi0), Real(k) / 400);
            const Real pd = std::pow(xi, p.m - 1), ps = std::pow(xi, p.sigma);
            const Real slack = 1 + 1e-15L;
            REQUIRE(e.kD * pd <= diffusivity(xi, p) * slack);
            REQUIRE(diffusivity(xi, p) <= e.KD * pd * slack);
            REQUIRE(e.kS * ps <= sensitivity(xi, p) * slack);
            REQUIRE(sensitivity(xi, p) <= e.KS * ps * slack);
        }
    }
}

TEST_CASE("monotone in amplitude and continuous in xi") {
    ModelParams p, q;
    q.d0 = 2;
    q.s0_coef = 3;
    for (int k = 0; k < 1000; ++k) {
        const Real xi = k * 0.01L;
        CHECK(diffusivity(xi, p) < diffusivity(xi, q));
        if (xi > 0) CHECK(sensitivity(xi, p) < sensitivity(xi, q));
        const Real h = 1e-9L;
        CHECK(static_cast<double>(std::abs(diffusivity(xi + h, p) - diffusivity(xi, p))) < 1e-7);
    }
}

TEST_CASE("regime examples") {
    ModelParams p;
    p.m = 1;
    p.sigma = 2;
    CHECK(regime_classify(p).to_string() == "Supercritical");
    p.sigma = Real(4) / 3;
    CHECK(regime_classify(p).to_string() == "Critical");
    CHECK(predict(regime_classify(p)) == Prediction::None);
    p.n = 4;
    p.m = -2;
    p.sigma = 0.25L;
    // the diffusion line sits at -2, so only the sensitivity condition is subcritical
    CHECK(regime_classify(p).to_string() == "SubcriticalSensitivity");
    p.n = 3;
    p.m = 1;
    p.sigma = 0.5L;
    CHECK(regime_classify(p).to_string() == "SubcriticalDiffusion|SubcriticalSensitivity");
    CHECK(predict(regime_classify(p)) == Prediction::NoBlowUp);
    p.n = 2;
    CHECK_THROWS_AS(regime_classify(p), UnsupportedDimension);
}

TEST_CASE("classification is stable under tiny perturbations off the lines") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> um(-2, 3), us(-1, 4);
    for (int k = 0; k < 2000; ++k) {
        ModelParams p;
        p.m = um(rng);
        p.sigma = us(rng);
        const RegimeSet base = regime_classify(p);
        if (base.has(Regime::Critical)) continue;
        for (Real d : {1e-15L, -1e-15L, 9e-15L, -9e-15L}) {
            ModelParams q = p;
            q.m += d;
            q.sigma -= d;
            CHECK(regime_classify(q) == base);
        }
    }
}

TEST_CASE("domain volume") {
    ModelParams p;
    CHECK(static_cast<double>(ball_volume(3)) == doctest::Approx(4.18879020478639098).epsilon(1e-15));
    CHECK(static_cast<double>(ball_volume(2)) == doctest::Approx(M_PI).epsilon(1e-15));
    p.R = 2;
    CHECK(static_cast<double>(domain_volume(p)) == doctest::Approx(8 * 4.18879020478639098).epsilon(1e-15));
    CHECK(mass_extent(p) == 8);
}

}  // TEST_SUITE
