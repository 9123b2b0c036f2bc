#pragma once

#include <complex>
#include <random>

#include <eigen3/Eigen/Dense>

// Shared helpers for the test suites. The random helpers avoid
// std::uniform_* distributions so that sequences are identical across
// standard library implementations.

namespace testutil {

inline double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

inline long rand_int(std::mt19937_64& rng, long lo, long hi) {
    return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
}

inline std::complex<double> rand_unit_disk(std::mt19937_64& rng) {
    while (true) {
        double x = 2.0 * u01(rng) - 1.0, y = 2.0 * u01(rng) - 1.0;
        if (x * x + y * y <= 1.0) return {x, y};
    }
}

// Independent reference for the theta kernel: the raw lattice sum
//   sum_{|n|_inf <= radius} exp(pi i (n+a)^T tau (n+a) + 2 pi i (n+a)^T (z+b))
// with no truncation logic at all. Kept deliberately naive.
inline std::complex<double> brute_theta(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& tau,
                                        const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                        int radius) {
    const int g = static_cast<int>(tau.rows());
    const std::complex<double> pi_i(0.0, std::acos(-1.0));
    std::complex<double> sum(0.0, 0.0);
    std::vector<int> n(g, -radius);
    while (true) {
        Eigen::VectorXcd m(g);
        for (int i = 0; i < g; ++i) m(i) = std::complex<double>(n[i] + a(i), 0.0);
        std::complex<double> quad(0.0, 0.0);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) quad += m(i) * tau(i, j) * m(j);
        std::complex<double> lin(0.0, 0.0);
        for (int i = 0; i < g; ++i) lin += m(i) * (z(i) + b(i));
        sum += std::exp(pi_i * quad + 2.0 * pi_i * lin);

        int axis = g - 1;
        while (axis >= 0) {
            if (++n[axis] <= radius) break;
            n[axis] = -radius;
            --axis;
        }
        if (axis < 0) break;
    }
    return sum;
}

inline std::complex<double> brute_theta00(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& tau,
                                          int radius) {
    const int g = static_cast<int>(tau.rows());
    return brute_theta(z, tau, Eigen::VectorXd::Zero(g), Eigen::VectorXd::Zero(g), radius);
}

} // namespace testutil
