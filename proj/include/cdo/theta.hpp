#pragma once

#include <eigen3/Eigen/Dense>

#include "cdo/errors.hpp"
#include "cdo/scalar.hpp"

namespace cdo {

// Riemann theta functions with characteristics,
//
//   theta_{a,b}(z, tau) = sum_{n in Z^g} exp( pi*i (n+a)^T tau (n+a)
//                                           + 2*pi*i (n+a)^T (z+b) ),
//
// evaluated by truncating the lattice sum to the cube |n|_inf <= R, with R
// chosen from a Gaussian tail bound so that the discarded part is below a
// requested error relative to the largest retained term. This normalization
// has theta(z) = 0 at z = 1/2 + tau/2 (genus 1) and makes
// theta(z+c)/theta(z) a section of the flat bundle with multiplier
// exp(-2*pi*i q^T c) under z -> z + m + tau q.

/// Validated point of the Siegel upper half space: tau symmetric, Im tau > 0.
struct SiegelPoint {
    int genus;
    Eigen::MatrixXcd tau;
    double im_min_eig; // smallest eigenvalue of Im tau, used by the tail bound
};

/// Real characteristic (a, b); basis sections use a = (integer vector)/m, b = 0.
struct ThetaCharacteristic {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    static ThetaCharacteristic zero(int g) {
        return {Eigen::VectorXd::Zero(g), Eigen::VectorXd::Zero(g)};
    }
};

struct TruncationPolicy {
    double target_error = 1e-13; // relative to the largest retained term
    int max_radius = 60;
};

/// Checks symmetry (to 1e-14) and positive definiteness of Im tau.
SiegelPoint validate_siegel(const Eigen::MatrixXcd& tau);

struct ThetaValue {
    Cplx value;
    double max_term;   // magnitude of the largest retained term
    double tail_bound; // bound on the discarded tail (absolute)
    int radius;
};

/// Smallest truncation radius whose tail bound meets the policy's target.
int truncation_radius(const SiegelPoint& sp, const Eigen::VectorXcd& z,
                      const ThetaCharacteristic& ch, const TruncationPolicy& tp);

ThetaValue theta_eval_full(const Eigen::VectorXcd& z, const SiegelPoint& sp,
                           const ThetaCharacteristic& ch, const TruncationPolicy& tp);

inline Cplx theta_eval(const Eigen::VectorXcd& z, const SiegelPoint& sp,
                       const ThetaCharacteristic& ch, const TruncationPolicy& tp) {
    return theta_eval_full(z, sp, ch, tp).value;
}

/// theta_{0,0}(z, tau) with the characteristic defaulted away.
Cplx theta0(const Eigen::VectorXcd& z, const SiegelPoint& sp, const TruncationPolicy& tp);

/// Like theta0 but raises DivisorProximity when |theta(z)| falls below
/// floor * (largest retained term); used wherever theta(z) is a denominator.
Cplx theta0_denominator(const Eigen::VectorXcd& z, const SiegelPoint& sp,
                        const TruncationPolicy& tp, double divisor_floor);

/// Section basis value F_{m,a}(z, c) = theta_{a/m,0}(m z + c, m tau) / theta(z)^m.
Cplx basis_section(int m, const Eigen::VectorXi& a, const Eigen::VectorXcd& z,
                   const Eigen::VectorXcd& c, const SiegelPoint& sp,
                   const TruncationPolicy& tp, double divisor_floor = 1e-8);

/// Degenerate sigma polynomial z1^3/3 - z2 (the rational limit of the
/// genus-2 sigma function); exact over rationals.
template <class S>
S sigma_schur_eval(const S& z1, const S& z2) {
    const S three = scalar_traits<S>::from_int(3);
    return z1 * z1 * z1 / three - z2;
}

} // namespace cdo
