#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdo/families.hpp"
#include "test_util.hpp"

using namespace cdo;

namespace {

const Cplx I(0.0, 1.0);
const Cplx TWO_PI_I(0.0, 2.0 * std::acos(-1.0));

Cplx theta1(const AbelianFamilyParams& p, Cplx w) {
    Eigen::VectorXcd v(1);
    v << w;
    return theta_eval(v, p.sp, ThetaCharacteristic::zero(1), p.tp);
}

Cplx theta2(const AbelianFamilyParams& p, Cplx w1, Cplx w2) {
    Eigen::VectorXcd v(2);
    v << w1, w2;
    return theta_eval(v, p.sp, ThetaCharacteristic::zero(2), p.tp);
}

} // namespace

TEST_CASE("parameter validation rejects zero steps and dimension mismatches") {
    auto p = AbelianFamilyParams::genus1_default();
    p.h(0) = Cplx(0.0, 0.0);
    CHECK_THROWS_AS(validate_abelian_params(p), Error);

    auto q = AbelianFamilyParams::genus2_default();
    q.h = Eigen::VectorXcd::Constant(1, Cplx(0.1, 0.0));
    CHECK_THROWS_AS(validate_abelian_params(q), ArityMismatch);
}

TEST_CASE("genus-1 basis: value at n=0 and the shift recurrence") {
    auto p = AbelianFamilyParams::genus1_default();
    auto fam = make_genus1_basis(p);
    REQUIRE(fam.rank == 1);

    Cplx z(0.23, 0.31);
    SpectralPoint<Cplx> P{z};

    // n = 0, c = 0: psi = theta(z + x)/theta(z)
    Cplx got = fam.eval(0, MultiIndex::zero(1), P);
    Cplx expect = theta1(p, z + p.x0(0)) / theta1(p, z);
    CHECK(std::abs(got - expect) < 1e-12);

    // psi(n+1) = (theta(z+x+(n+1)h)/theta(z+x+nh)) (theta(z-h)/theta(z)) psi(n)
    for (int n = -3; n <= 3; ++n) {
        MultiIndex mn(std::vector<int>{n}), mn1(std::vector<int>{n + 1});
        Cplx lhs = fam.eval(0, mn1, P);
        Cplx num = theta1(p, z + p.x0(0) + static_cast<double>(n + 1) * p.h(0));
        Cplx den = theta1(p, z + p.x0(0) + static_cast<double>(n) * p.h(0));
        Cplx rhs = num / den * theta1(p, z - p.h(0)) / theta1(p, z) * fam.eval(0, mn, P);
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("genus-1 basis transforms with the n-independent factor exp(-2 pi i q (c+x))") {
    auto p = AbelianFamilyParams::genus1_default();
    p.c(0) = Cplx(0.12, 0.07); // nonzero bundle parameter to make the factor nontrivial
    auto fam = make_genus1_basis(p);

    std::mt19937_64 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 60 && checked < 20; ++trial) {
        Cplx z = Cplx(0.35, 0.2) + 0.3 * testutil::rand_unit_disk(rng);
        long m0 = testutil::rand_int(rng, -1, 1);
        long q = testutil::rand_int(rng, -1, 1);
        if (m0 == 0 && q == 0) continue;
        Cplx zs = z + Cplx(static_cast<double>(m0), 0.0) + p.sp.tau(0, 0) * static_cast<double>(q);
        Cplx factor = std::exp(-TWO_PI_I * static_cast<double>(q) * (p.c(0) + p.x0(0)));
        for (int n : {-2, 0, 3}) {
            MultiIndex mn(std::vector<int>{n});
            Cplx lhs, rhs;
            try {
                lhs = fam.eval(0, mn, {zs});
                rhs = factor * fam.eval(0, mn, {z});
            } catch (const DivisorProximity&) {
                goto next_trial;
            }
            CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(lhs)));
        }
        ++checked;
    next_trial:;
    }
    CHECK(checked >= 20);
}

TEST_CASE("genus-2 basis: psi_1 at n=0 and the common transformation factor") {
    auto p = AbelianFamilyParams::genus2_default();
    auto fam = make_genus2_basis(p);
    REQUIRE(fam.rank == 2);

    Cplx z1(0.21, 0.33), z2(0.45, 0.18);
    SpectralPoint<Cplx> P{z1, z2};

    Cplx got = fam.eval(0, MultiIndex::zero(2), P);
    Cplx expect = theta2(p, z1 + p.x0(0), z2 + p.x0(1)) / theta2(p, z1, z2);
    CHECK(std::abs(got - expect) < 1e-12 * std::max(1.0, std::abs(expect)));

    // both rows pick up the same factor under z -> z + m0 + tau q
    std::mt19937_64 rng(6);
    int checked = 0;
    for (int trial = 0; trial < 80 && checked < 20; ++trial) {
        Eigen::VectorXcd z(2);
        z << Cplx(0.3, 0.25) + 0.25 * testutil::rand_unit_disk(rng),
            Cplx(0.4, 0.3) + 0.25 * testutil::rand_unit_disk(rng);
        Eigen::VectorXd q(2), m0(2);
        for (int i = 0; i < 2; ++i) {
            m0(i) = static_cast<double>(testutil::rand_int(rng, -1, 1));
            q(i) = static_cast<double>(testutil::rand_int(rng, -1, 1));
        }
        if (q.cwiseAbs().sum() == 0 && m0.cwiseAbs().sum() == 0) continue;
        Eigen::VectorXcd zs = z + m0.cast<Cplx>() + p.sp.tau * q.cast<Cplx>();
        Cplx phase = q.cast<Cplx>().dot(p.c + p.x0);
        Cplx factor = std::exp(-TWO_PI_I * phase);
        MultiIndex n(std::vector<int>{1, -1});
        Cplx l0, r0, l1, r1;
        try {
            l0 = fam.eval(0, n, {zs(0), zs(1)});
            r0 = factor * fam.eval(0, n, {z(0), z(1)});
            l1 = fam.eval(1, n, {zs(0), zs(1)});
            r1 = factor * fam.eval(1, n, {z(0), z(1)});
        } catch (const DivisorProximity&) {
            continue;
        }
        CHECK(std::abs(l0 - r0) < 1e-8 * std::max(1.0, std::abs(l0)));
        CHECK(std::abs(l1 - r1) < 1e-8 * std::max(1.0, std::abs(l1)));
        ++checked;
    }
    CHECK(checked >= 20);
}

TEST_CASE("genus-2 psi_2 vanishes on the translated divisor") {
    auto p = AbelianFamilyParams::genus2_default();
    auto fam = make_genus2_basis(p);

    // Solve theta(z - beta) = 0 for z1 with z2 fixed (1D Newton), away from Theta.
    Cplx z2(0.4, 0.1);
    Cplx z1(0.6, 0.9);
    auto f = [&](Cplx w) { return theta2(p, w - p.beta(0), z2 - p.beta(1)); };
    for (int it = 0; it < 60; ++it) {
        Cplx fv = f(z1);
        if (std::abs(fv) < 1e-13) break;
        Cplx d = (f(z1 + 1e-6) - f(z1 - 1e-6)) / 2e-6;
        z1 -= fv / d;
    }
    REQUIRE(std::abs(f(z1)) < 1e-12);
    REQUIRE(std::abs(theta2(p, z1, z2)) > 1e-3); // admissible: off the denominator divisor

    MultiIndex n(std::vector<int>{1, 0});
    Cplx psi2 = fam.eval(1, n, {z1, z2});
    Cplx psi1 = fam.eval(0, n, {z1, z2});
    CHECK(std::abs(psi2) < 1e-9);
    CHECK(std::abs(psi1) > 1e-6);
}

TEST_CASE("genus-1 eigenvalues: explicit zero and lattice invariance") {
    auto p = AbelianFamilyParams::genus1_default();
    auto lam = genus1_eigenvalue(p, EigenvalueChoice::Lambda);
    auto mu = genus1_eigenvalue(p, EigenvalueChoice::Mu);

    // lambda(z) has the explicit factor theta(z - h): zero at z = q + h
    Cplx q_half = (Cplx(1.0, 0.0) + p.sp.tau(0, 0)) / 2.0;
    Cplx at_zero = lam.eval({q_half + p.h(0)});
    CHECK(std::abs(at_zero) < 1e-12);

    // elliptic function: invariant under the period lattice
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Cplx z = Cplx(0.3, 0.2) + 0.3 * testutil::rand_unit_disk(rng);
        for (const auto& f : {lam, mu}) {
            Cplx a = f.eval({z});
            Cplx b = f.eval({z + Cplx(1.0, 0.0)});
            Cplx c = f.eval({z + p.sp.tau(0, 0)});
            CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(a)));
            CHECK(std::abs(a - c) < 1e-10 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("genus-2 eigenvalue is invariant under the period lattice") {
    auto p = AbelianFamilyParams::genus2_default();
    auto lam = genus2_eigenvalue(p, 0);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        SpectralPoint<Cplx> z{Cplx(0.3, 0.2) + 0.2 * testutil::rand_unit_disk(rng),
                              Cplx(0.35, 0.3) + 0.2 * testutil::rand_unit_disk(rng)};
        Cplx a = lam.eval(z);
        Cplx b = lam.eval({z[0] + Cplx(1.0, 0.0), z[1]});
        Cplx c = lam.eval({z[0] + p.sp.tau(0, 0), z[1] + p.sp.tau(1, 0)});
        CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(a)));
        CHECK(std::abs(a - c) < 1e-9 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("spectral sampling: determinism, floor contract, acceptance rate") {
    auto p = AbelianFamilyParams::genus1_default();
    auto fam = make_genus1_basis(p);

    auto a = sample_spectral_points(fam, 50, 42, 1e-3);
    auto b = sample_spectral_points(fam, 50, 42, 1e-3);
    REQUIRE(a.size() == 50);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i][0] == b[i][0]);

    for (const auto& P : a) {
        ThetaValue tv = theta_eval_full((Eigen::VectorXcd(1) << P[0]).finished(), p.sp,
                                        ThetaCharacteristic::zero(1), p.tp);
        CHECK(std::abs(tv.value) >= 1e-3 * tv.max_term);
    }

    CHECK_THROWS_AS(sample_spectral_points(fam, 5, 1, 1e3), SamplingExhausted);
    CHECK_THROWS_AS(sample_spectral_points(fam, 0, 1, 1e-3), Error);
}
