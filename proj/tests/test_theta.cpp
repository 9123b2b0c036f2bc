#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdo/theta.hpp"
#include "test_util.hpp"

using namespace cdo;
using testutil::brute_theta;
using testutil::brute_theta00;

namespace {

const Cplx I(0.0, 1.0);

SiegelPoint genus1_i() {
    Eigen::MatrixXcd tau(1, 1);
    tau << I;
    return validate_siegel(tau);
}

SiegelPoint genus2_default() {
    Eigen::MatrixXcd tau(2, 2);
    tau << 2.0 * I, Cplx(0.5, 0.0), Cplx(0.5, 0.0), 3.0 * I;
    return validate_siegel(tau);
}

Eigen::VectorXcd vec1(Cplx z) {
    Eigen::VectorXcd v(1);
    v << z;
    return v;
}

Eigen::VectorXcd vec2(Cplx z1, Cplx z2) {
    Eigen::VectorXcd v(2);
    v << z1, z2;
    return v;
}

// Random tau with Im in [0.8, 3] (genus 1).
SiegelPoint random_genus1_tau(std::mt19937_64& rng) {
    Eigen::MatrixXcd tau(1, 1);
    tau << Cplx(0.6 * testutil::u01(rng) - 0.3, 0.8 + 2.2 * testutil::u01(rng));
    return validate_siegel(tau);
}

} // namespace

TEST_CASE("validate_siegel accepts and rejects as specified") {
    CHECK(genus1_i().genus == 1);
    CHECK(genus2_default().genus == 2);

    Eigen::MatrixXcd bad(1, 1);
    bad << -I;
    CHECK_THROWS_AS(validate_siegel(bad), ImaginaryPartNotPositiveDefinite);

    Eigen::MatrixXcd asym(2, 2);
    asym << 2.0 * I, Cplx(0.5, 0.0), Cplx(0.4, 0.0), 3.0 * I;
    CHECK_THROWS_AS(validate_siegel(asym), NotSymmetric);

    // indefinite imaginary part in genus 2
    Eigen::MatrixXcd indef(2, 2);
    indef << 2.0 * I, Cplx(0.0, 5.0), Cplx(0.0, 5.0), 3.0 * I;
    CHECK_THROWS_AS(validate_siegel(indef), ImaginaryPartNotPositiveDefinite);
}

TEST_CASE("theta(0, tau=i) matches the radius-30 reference sum") {
    SiegelPoint sp = genus1_i();
    TruncationPolicy tp{1e-13, 60};
    Cplx ref = brute_theta00(vec1(0.0), sp.tau, 30);
    Cplx val = theta_eval(vec1(0.0), sp, ThetaCharacteristic::zero(1), tp);
    CHECK(std::abs(val - ref) < 1e-12);
    CHECK(val.real() == doctest::Approx(1.08643481).epsilon(1e-8));
}

TEST_CASE("theta vanishes at the half-period (1+tau)/2") {
    SiegelPoint sp = genus1_i();
    TruncationPolicy tp{1e-13, 60};
    Cplx z = (Cplx(1.0, 0.0) + sp.tau(0, 0)) / 2.0;
    CHECK(std::abs(theta_eval(vec1(z), sp, ThetaCharacteristic::zero(1), tp)) < 1e-13 * 10);

    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        SiegelPoint spr = random_genus1_tau(rng);
        Cplx zr = (Cplx(1.0, 0.0) + spr.tau(0, 0)) / 2.0;
        CHECK(std::abs(theta_eval(vec1(zr), spr, ThetaCharacteristic::zero(1), tp)) < 1e-12);
    }
}

TEST_CASE("evenness of theta_{0,0}") {
    TruncationPolicy tp{1e-13, 60};
    std::mt19937_64 rng(7);
    SiegelPoint sp1 = genus1_i();
    SiegelPoint sp2 = genus2_default();
    for (int trial = 0; trial < 20; ++trial) {
        Cplx z = 0.7 * testutil::rand_unit_disk(rng);
        Cplx a = theta_eval(vec1(z), sp1, ThetaCharacteristic::zero(1), tp);
        Cplx b = theta_eval(vec1(-z), sp1, ThetaCharacteristic::zero(1), tp);
        CHECK(std::abs(a - b) <= 2e-13 * std::max(1.0, std::abs(a)));

        Eigen::VectorXcd z2 = vec2(0.7 * testutil::rand_unit_disk(rng), 0.7 * testutil::rand_unit_disk(rng));
        Cplx c = theta_eval(z2, sp2, ThetaCharacteristic::zero(2), tp);
        Cplx d = theta_eval(-z2, sp2, ThetaCharacteristic::zero(2), tp);
        CHECK(std::abs(c - d) <= 2e-13 * std::max(1.0, std::abs(c)));
    }
}

TEST_CASE("quasi-periodicity in genus 1 and 2") {
    // theta(z + m0 + tau q) = exp(-pi i q^T tau q - 2 pi i q^T z) theta(z)
    TruncationPolicy tp{1e-13, 60};
    const Cplx pi_i(0.0, std::acos(-1.0));
    std::mt19937_64 rng(11);

    auto run = [&](const SiegelPoint& sp) {
        const int g = sp.genus;
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXcd z(g);
            Eigen::VectorXcd shift(g);
            Eigen::VectorXd q(g);
            for (int i = 0; i < g; ++i) {
                z(i) = 0.6 * testutil::rand_unit_disk(rng);
                double m0 = static_cast<double>(testutil::rand_int(rng, -2, 2));
                q(i) = static_cast<double>(testutil::rand_int(rng, -2, 2));
                shift(i) = Cplx(m0, 0.0);
            }
            Eigen::VectorXcd zq = z + shift + sp.tau * q.cast<Cplx>();
            Cplx lhs = theta_eval(zq, sp, ThetaCharacteristic::zero(g), tp);
            Cplx qtq = q.cast<Cplx>().dot(sp.tau * q.cast<Cplx>());
            Cplx factor = std::exp(-pi_i * qtq - 2.0 * pi_i * q.cast<Cplx>().dot(z));
            Cplx rhs = factor * theta_eval(z, sp, ThetaCharacteristic::zero(g), tp);
            double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
            CHECK(std::abs(lhs - rhs) < 10 * tp.target_error * scale);
        }
    };
    run(genus1_i());
    run(genus2_default());
}

TEST_CASE("refinement stability: halving target_error moves the value less than the coarse error") {
    std::mt19937_64 rng(13);
    SiegelPoint sp2 = genus2_default();
    for (double eps : {1e-8, 1e-10, 1e-12}) {
        TruncationPolicy coarse{eps, 60};
        TruncationPolicy fine{eps / 2.0, 60};
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXcd z = vec2(0.5 * testutil::rand_unit_disk(rng), 0.5 * testutil::rand_unit_disk(rng));
            Cplx a = theta_eval(z, sp2, ThetaCharacteristic::zero(2), coarse);
            Cplx b = theta_eval(z, sp2, ThetaCharacteristic::zero(2), fine);
            CHECK(std::abs(a - b) < eps * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("truncation radius: agreement, monotonicity, cap") {
    TruncationPolicy tp{1e-12, 60};
    SiegelPoint sp = genus1_i();
    int r_unit = truncation_radius(sp, vec1(0.0), ThetaCharacteristic::zero(1), tp);
    Cplx ref = brute_theta00(vec1(0.0), sp.tau, 30);
    Cplx val = theta_eval(vec1(0.0), sp, ThetaCharacteristic::zero(1), tp);
    CHECK(std::abs(val - ref) < 1e-12);

    Eigen::MatrixXcd tau10(1, 1);
    tau10 << 10.0 * I;
    SiegelPoint sp10 = validate_siegel(tau10);
    int r_fast = truncation_radius(sp10, vec1(0.0), ThetaCharacteristic::zero(1), tp);
    CHECK(r_fast < r_unit);

    TruncationPolicy unreachable{1e-300, 5};
    CHECK_THROWS_AS(truncation_radius(sp, vec1(0.0), ThetaCharacteristic::zero(1), unreachable),
                    RadiusCapExceeded);
}

TEST_CASE("basis_section at m=1 is theta(z+c)/theta(z)") {
    TruncationPolicy tp{1e-13, 60};
    SiegelPoint sp = genus1_i();
    Eigen::VectorXi a0 = Eigen::VectorXi::Zero(1);
    Cplx z(0.23, 0.11), c(0.4, -0.2);
    Cplx f = basis_section(1, a0, vec1(z), vec1(c), sp, tp);
    Cplx expect = theta_eval(vec1(z + c), sp, ThetaCharacteristic::zero(1), tp) /
                  theta_eval(vec1(z), sp, ThetaCharacteristic::zero(1), tp);
    CHECK(std::abs(f - expect) < 1e-12);
}

TEST_CASE("basis_section m=2 matches an independent composition of raw sums") {
    TruncationPolicy tp{1e-13, 60};
    SiegelPoint sp = genus1_i();
    Eigen::VectorXi a(1);
    a << 1;
    Cplx z(0.2, 0.3), c(0.1, 0.0);
    Cplx f = basis_section(2, a, vec1(z), vec1(c), sp, tp);

    // reference: raw lattice sums composed by hand
    Eigen::MatrixXcd tau2 = 2.0 * sp.tau;
    Eigen::VectorXd ch_a(1), ch_b(1);
    ch_a << 0.5;
    ch_b << 0.0;
    Cplx num = brute_theta(vec1(2.0 * z + c), tau2, ch_a, ch_b, 30);
    Cplx den = brute_theta00(vec1(z), sp.tau, 30);
    Cplx expect = num / (den * den);
    CHECK(std::abs(f - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
}

TEST_CASE("section transformation law under lattice shifts") {
    // F_{m,a}(z + m0 + tau q, c) = exp(-2 pi i q^T c) F_{m,a}(z, c)
    TruncationPolicy tp{1e-13, 60};
    const Cplx pi_i(0.0, std::acos(-1.0));
    std::mt19937_64 rng(17);
    SiegelPoint sp = genus1_i();
    Eigen::VectorXi a(1);
    a << 1;
    Cplx c(0.3, 0.1);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 20; ++trial) {
        Cplx z = 0.4 * testutil::rand_unit_disk(rng) + Cplx(0.3, 0.2);
        long m0 = testutil::rand_int(rng, -1, 1);
        long q = testutil::rand_int(rng, -1, 1);
        Cplx zshift = z + Cplx(static_cast<double>(m0), 0.0) + sp.tau(0, 0) * static_cast<double>(q);
        Cplx lhs, rhs;
        try {
            lhs = basis_section(2, a, vec1(zshift), vec1(c), sp, tp);
            rhs = std::exp(-2.0 * pi_i * static_cast<double>(q) * c) *
                  basis_section(2, a, vec1(z), vec1(c), sp, tp);
        } catch (const DivisorProximity&) {
            continue; // unlucky draw next to the divisor
        }
        double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        CHECK(std::abs(lhs - rhs) < 10 * tp.target_error * scale);
        ++checked;
    }
    CHECK(checked >= 20);
}

TEST_CASE("divisor proximity raises instead of returning a huge ratio") {
    TruncationPolicy tp{1e-13, 60};
    SiegelPoint sp = genus1_i();
    Cplx half_period = (Cplx(1.0, 0.0) + sp.tau(0, 0)) / 2.0;
    Eigen::VectorXi a0 = Eigen::VectorXi::Zero(1);
    CHECK_THROWS_AS(basis_section(1, a0, vec1(half_period), vec1(Cplx(0.1, 0.0)), sp, tp),
                    DivisorProximity);
}

TEST_CASE("degenerate sigma polynomial") {
    CHECK(sigma_schur_eval<Rat>(Rat(0), Rat(0)).is_zero());
    CHECK(sigma_schur_eval<Rat>(Rat(1), Rat(1, 3)).is_zero());
    CHECK(sigma_schur_eval<Rat>(Rat(3), Rat(1)) == Rat(8));
    CHECK(std::abs(sigma_schur_eval<Cplx>(Cplx(3.0, 0.0), Cplx(1.0, 0.0)) - Cplx(8.0, 0.0)) < 1e-14);
}
