#pragma once

#include <array>
#include <string>
#include <vector>

#include "cdo/difference_operator.hpp"
#include "cdo/families.hpp"

namespace cdo {

// Operator builders. The closed-form builders transcribe explicit coefficient
// formulas (theta ratios at special points of the spectral variety, or
// rational functions of n); the collocation builder determines coefficients
// independently by solving D(lambda) Psi = lambda Psi at sampled spectral
// points, per lattice point n, and serves as the oracle the closed forms are
// checked against.

// ---------------------------------------------------------------------------
// Collocation
// ---------------------------------------------------------------------------

struct CollocationConfig {
    int samples_per_unknown = 3;
    double rank_tol = 1e-9;
    double residual_tol = 1e-7;
    std::uint64_t seed = 42;
    double floor = 1e-3;      // divisor floor for sampled spectral points
    double prune_rel = 1e-10; // float field: relative magnitude below which a solved
                              // coefficient becomes a structural zero at that n
};

/// Candidate shifts of one matrix entry of the operator.
using SupportTemplate = std::vector<MultiIndex>;
/// templates[i][j] is the support of entry (i, j).
using TemplateMatrix = std::vector<std::vector<SupportTemplate>>;

/// All shifts k with 0 <= k componentwise and degree(k) <= deg.
SupportTemplate degree_template(int g, int deg);

/// Solves, independently for each n and each operator row, the linear system
///   sum_j sum_k C^{ij}_k(n) psi_j(n+k, P_s) = lambda(P_s) psi_i(n, P_s)
/// over sampled spectral points. Exact field: exact elimination, requiring a
/// unique exact solution. Float field: SVD least squares with rank and
/// residual acceptance gates. Lattice points where the solve fails are
/// recorded as poles of the returned coefficients, with the reason.
template <class S>
DifferenceOperator<S> build_collocation(const BasisFamily<S>& family,
                                        const SpectralFunction<S>& lambda,
                                        const TemplateMatrix& templates,
                                        const CollocationConfig& cfg = {});

// ---------------------------------------------------------------------------
// Genus 1: L1 = v2 T^2 + v1 T, L2 = u3 T^3 + u2 T^2 + u1 T
// ---------------------------------------------------------------------------

/// The named points on the elliptic curve where coefficients are read off:
/// q = (1 + tau)/2 is the theta zero, p = q + h, r = q - h/2.
struct SpecialPointsG1 {
    Cplx p, q, r;
};

struct Genus1Pair {
    DifferenceOperator<Cplx> L1; // eigenvalue theta(z-h)theta(z+h)/theta^2
    DifferenceOperator<Cplx> L2; // eigenvalue theta(z-h)theta^2(z+h/2)/theta^3
    SpecialPointsG1 points;
};

Genus1Pair build_genus1_pair(const AbelianFamilyParams& p);

// ---------------------------------------------------------------------------
// Divisor intersections (Newton search on the abelian variety)
// ---------------------------------------------------------------------------

struct NewtonGrid {
    int per_axis = 8;        // seed grid resolution per real coordinate of the cell
    int keep_best = 256;     // Newton polish starts from the best-scoring seeds
    int max_iter = 50;
    double tol = 1e-12;      // convergence threshold on max_i |theta(z - s_i)|
    double dedup_tol = 1e-6; // lattice-reduced distance identifying duplicates
};

/// Roots of the system theta(z - shifts[i]) = 0, i = 1..g, modulo the period
/// lattice, sorted lexicographically by reduced coordinates. Throws
/// NewtonDivergence when nothing converges.
std::vector<Eigen::VectorXcd> find_divisor_intersection(const std::vector<Eigen::VectorXcd>& shifts,
                                                        const SiegelPoint& sp,
                                                        const TruncationPolicy& tp,
                                                        const NewtonGrid& grid = {});

/// The six intersection pairs used by the genus-2 construction. Each pair
/// lists exactly two points (the translated theta divisors meet twice).
struct DivisorIntersections {
    std::array<Eigen::VectorXcd, 2> h1_h2;     // Theta_{h1 e1} and Theta_{h2 e2}
    std::array<Eigen::VectorXcd, 2> h1_zero;   // Theta_{h1 e1} and Theta
    std::array<Eigen::VectorXcd, 2> h2_zero;   // Theta_{h2 e2} and Theta
    std::array<Eigen::VectorXcd, 2> zero_beta; // Theta and Theta_beta
    std::array<Eigen::VectorXcd, 2> h1_beta;   // Theta_{h1 e1} and Theta_beta
    std::array<Eigen::VectorXcd, 2> h2_beta;   // Theta_{h2 e2} and Theta_beta
};

DivisorIntersections find_genus2_special_points(const AbelianFamilyParams& p,
                                                const NewtonGrid& grid = {});

/// 2x2 operator for lambda = theta(z - h_a e_a) theta(z + h_a e_a) / theta^2(z)
/// (axis is 0-based), built by substituting the special points: the row-1
/// vanishings and the two 2x2 solves, then the row-2 cascade over the
/// remaining intersection pairs.
DifferenceOperator<Cplx> build_genus2_special(const AbelianFamilyParams& p,
                                              const DivisorIntersections& pts, int axis);

// ---------------------------------------------------------------------------
// Degenerate (exact-rational) pair
// ---------------------------------------------------------------------------

struct CoefficientComparison {
    std::string name;
    int points_compared = 0;
    int points_skipped = 0; // formula pole points inside the window
    bool all_match = true;
};

struct SchurPair {
    // Collocation-built operators (the verified ground truth).
    DifferenceOperator<Rat> L_lambda, L_mu;
    // Printed-formula transcriptions with explicit integer pole sets; the
    // L_lambda (2,1)-entry T1-coefficient is taken from collocation because
    // its displayed formula references an undefined symbol.
    DifferenceOperator<Rat> L_lambda_printed, L_mu_printed;
    std::vector<CoefficientComparison> comparisons;
    std::string undefined_symbol_note;
    bool q1_matches_p11_reading = false; // undefined symbol read as the (2,2) T1T2 coefficient
    bool q1_matches_q12_reading = false; // undefined symbol read as the (2,1) T1T2^2 coefficient
};

SchurPair build_schur_pair(const LatticeWindow& compare_window = LatticeWindow::cube(2, 0, 8),
                           const CollocationConfig& cfg = {});

// ---------------------------------------------------------------------------
// Omega pair (exact transcription)
// ---------------------------------------------------------------------------

struct OmegaPair {
    DifferenceOperator<Rat> D1; // eigenvalue z2 w1 / g
    DifferenceOperator<Rat> D2; // eigenvalue z1 z2 w1 w2 / g^2
};

/// Transcribed 2x2 operators for the concrete instance (B = 1, c1 = 2,
/// c2 = -1, Lambda = 1); other parameter sets must go through the
/// collocation builder instead.
OmegaPair build_omega_pair(const OmegaParams& p);

} // namespace cdo
