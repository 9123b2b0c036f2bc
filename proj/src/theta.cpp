#include "cdo/theta.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace cdo {

namespace {

constexpr double kPi = std::numbers::pi;

// Number of lattice points with |n|_inf == k in Z^g.
double shell_count(int g, int k) {
    if (k == 0) return 1.0;
    return std::pow(2.0 * k + 1.0, g) - std::pow(2.0 * k - 1.0, g);
}

// Upper bound on |term(n)| over the shell |n|_inf == k:
//   |term| = exp(-pi (n+a)^T Y (n+a) - 2 pi (n+a).y)
//         <= exp(-pi lam_min max(0, k - |a|_inf)^2 + 2 pi (sqrt(g) k + |a|_2) |y|_2).
double shell_term_bound(int g, int k, double lam_min, double a_inf, double a_norm, double y_norm) {
    double radial = std::max(0.0, static_cast<double>(k) - a_inf);
    double expo = -kPi * lam_min * radial * radial +
                  2.0 * kPi * (std::sqrt(static_cast<double>(g)) * k + a_norm) * y_norm;
    return std::exp(expo);
}

// Sum of shell bounds for k > R; returns +inf if it has not started decaying
// by a generous horizon (tau too close to the boundary for this bound).
double tail_bound_from(int g, int R, double lam_min, double a_inf, double a_norm, double y_norm) {
    double total = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    bool decaying = false;
    for (int k = R + 1; k <= R + 4000; ++k) {
        double s = shell_count(g, k) * shell_term_bound(g, k, lam_min, a_inf, a_norm, y_norm);
        total += s;
        if (s < prev) decaying = true;
        if (decaying && s < 1e-3 * total) return total;
        if (!decaying && k > R + 2000) break;
        prev = s;
    }
    return std::numeric_limits<double>::infinity();
}

struct SumGeometry {
    Eigen::MatrixXd Y;     // Im tau
    Eigen::VectorXd y;     // Im z  (characteristic b is real, so Im(z+b) = Im z)
    Eigen::VectorXd peak;  // real minimizer -Y^{-1} y of the exponent
    double a_inf, a_norm, y_norm;
    double peak_term;      // |term| at the lattice point nearest the peak
    int peak_inf;          // |round(peak - a)|_inf
};

double term_magnitude(const Eigen::VectorXd& m, const Eigen::MatrixXd& Y, const Eigen::VectorXd& y) {
    return std::exp(-kPi * m.dot(Y * m) - 2.0 * kPi * m.dot(y));
}

SumGeometry geometry(const Eigen::VectorXcd& z, const SiegelPoint& sp, const ThetaCharacteristic& ch) {
    SumGeometry geo;
    geo.Y = sp.tau.imag();
    geo.y = z.imag();
    geo.peak = -geo.Y.ldlt().solve(geo.y);
    geo.a_inf = ch.a.size() ? ch.a.cwiseAbs().maxCoeff() : 0.0;
    geo.a_norm = ch.a.norm();
    geo.y_norm = geo.y.norm();
    Eigen::VectorXd n0 = (geo.peak - ch.a).array().round();
    geo.peak_term = term_magnitude(n0 + ch.a, geo.Y, geo.y);
    geo.peak_inf = n0.size() ? static_cast<int>(n0.cwiseAbs().maxCoeff()) : 0;
    return geo;
}

int radius_for(const SiegelPoint& sp, const SumGeometry& geo, const TruncationPolicy& tp) {
    if (tp.target_error <= 0.0) throw Error("target_error must be positive");
    double threshold = tp.target_error * geo.peak_term;
    for (int R = geo.peak_inf; R <= tp.max_radius; ++R) {
        double tail = tail_bound_from(sp.genus, R, sp.im_min_eig, geo.a_inf, geo.a_norm, geo.y_norm);
        if (tail <= threshold) return R;
    }
    throw RadiusCapExceeded("truncation radius exceeds cap " + std::to_string(tp.max_radius));
}

} // namespace

SiegelPoint validate_siegel(const Eigen::MatrixXcd& tau) {
    if (tau.rows() != tau.cols() || tau.rows() < 1)
        throw NotSymmetric("period matrix must be square");
    const int g = static_cast<int>(tau.rows());
    double scale = std::max(1.0, tau.cwiseAbs().maxCoeff());
    for (int i = 0; i < g; ++i)
        for (int j = i + 1; j < g; ++j)
            if (std::abs(tau(i, j) - tau(j, i)) > 1e-14 * scale)
                throw NotSymmetric("period matrix is not symmetric");
    Eigen::MatrixXd Y = tau.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Y);
    double lam_min = es.eigenvalues().minCoeff();
    if (lam_min <= 0.0)
        throw ImaginaryPartNotPositiveDefinite("Im tau is not positive definite");
    return {g, tau, lam_min};
}

int truncation_radius(const SiegelPoint& sp, const Eigen::VectorXcd& z,
                      const ThetaCharacteristic& ch, const TruncationPolicy& tp) {
    return radius_for(sp, geometry(z, sp, ch), tp);
}

ThetaValue theta_eval_full(const Eigen::VectorXcd& z, const SiegelPoint& sp,
                           const ThetaCharacteristic& ch, const TruncationPolicy& tp) {
    const int g = sp.genus;
    if (z.size() != g) throw ArityMismatch("z dimension does not match genus");
    if (ch.a.size() != g || ch.b.size() != g)
        throw ArityMismatch("characteristic dimension does not match genus");

    SumGeometry geo = geometry(z, sp, ch);
    int R = radius_for(sp, geo, tp);

    const Cplx two_pi_i(0.0, 2.0 * kPi);
    const Cplx pi_i(0.0, kPi);
    Eigen::VectorXcd zb = z + ch.b.cast<Cplx>();

    // Shell-by-shell summation in a fixed lexicographic order per shell keeps
    // the result deterministic for a given (parameters, policy).
    Cplx sum(0.0, 0.0);
    double max_term = 0.0;
    Eigen::VectorXd m(g);
    std::vector<int> n(g, 0);
    for (int shell = 0; shell <= R; ++shell) {
        std::function<void(int, bool)> walk = [&](int axis, bool on_boundary) {
            if (axis == g) {
                if (!on_boundary) return; // interior points were summed in earlier shells
                for (int i = 0; i < g; ++i) m[i] = n[i] + ch.a[i];
                Cplx quad = pi_i * (m.cast<Cplx>().dot(sp.tau * m.cast<Cplx>()));
                Cplx lin = two_pi_i * m.cast<Cplx>().dot(zb);
                Cplx term = std::exp(quad + lin);
                sum += term;
                max_term = std::max(max_term, std::abs(term));
                return;
            }
            for (int v = -shell; v <= shell; ++v) {
                n[axis] = v;
                walk(axis + 1, on_boundary || std::abs(v) == shell);
            }
        };
        walk(0, shell == 0);
    }

    double tail = tail_bound_from(g, R, sp.im_min_eig, geo.a_inf, geo.a_norm, geo.y_norm);
    return {sum, max_term, tail, R};
}

Cplx theta0(const Eigen::VectorXcd& z, const SiegelPoint& sp, const TruncationPolicy& tp) {
    return theta_eval(z, sp, ThetaCharacteristic::zero(sp.genus), tp);
}

Cplx theta0_denominator(const Eigen::VectorXcd& z, const SiegelPoint& sp,
                        const TruncationPolicy& tp, double divisor_floor) {
    ThetaValue tv = theta_eval_full(z, sp, ThetaCharacteristic::zero(sp.genus), tp);
    if (std::abs(tv.value) < divisor_floor * tv.max_term)
        throw DivisorProximity("theta denominator within " + std::to_string(divisor_floor) +
                               " of the divisor");
    return tv.value;
}

Cplx basis_section(int m, const Eigen::VectorXi& a, const Eigen::VectorXcd& z,
                   const Eigen::VectorXcd& c, const SiegelPoint& sp,
                   const TruncationPolicy& tp, double divisor_floor) {
    if (m < 1) throw Error("section level m must be positive");
    if (a.size() != sp.genus || z.size() != sp.genus || c.size() != sp.genus)
        throw ArityMismatch("basis_section dimension mismatch");

    Cplx den = theta0_denominator(z, sp, tp, divisor_floor);

    SiegelPoint sp_m = sp;
    sp_m.tau = sp.tau * static_cast<double>(m);
    sp_m.im_min_eig = sp.im_min_eig * m;

    ThetaCharacteristic ch{Eigen::VectorXd(sp.genus), Eigen::VectorXd::Zero(sp.genus)};
    for (int i = 0; i < sp.genus; ++i) {
        int ai = ((a[i] % m) + m) % m; // reduce mod m into [0, m)
        ch.a[i] = static_cast<double>(ai) / m;
    }

    Cplx num = theta_eval(static_cast<double>(m) * z + c, sp_m, ch, tp);
    return num / cpow_int(den, m);
}

} // namespace cdo
