#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "cdo/lattice_function.hpp"
#include "cdo/linalg.hpp"
#include "cdo/multi_index.hpp"
#include "cdo/theta.hpp"

namespace cdo {

// Basis families Psi = (psi_1, ..., psi_N) of shift-compatible functions
// psi_j(n, P) on Z^g x (spectral variety), together with eigenvalue
// functions lambda(P) and samplers of admissible spectral points. The
// abelian families are built from theta-function ratios; the degenerate and
// rational families are exact over the rational field.

enum class FamilyTag { Genus1, Genus2Abelian, SchurDegenerate, OmegaRational, GammaRational };

template <class S>
using SpectralPoint = std::vector<S>;

template <class S>
struct SpectralFunction {
    std::function<S(const SpectralPoint<S>&)> eval; // throws PoleHit on the pole divisor
    std::function<bool(const SpectralPoint<S>&)> is_pole;
};

template <class S>
struct BasisFamily {
    FamilyTag tag;
    int rank = 1;
    int vars = 1; // number of discrete variables g
    // j is 0-based; throws DivisorProximity / PoleHit at inadmissible points.
    std::function<S(int j, const MultiIndex& n, const SpectralPoint<S>&)> eval;
    // Deterministic-given-seed admissible points; divisor denominators kept
    // at magnitude >= floor. Throws SamplingExhausted.
    std::function<std::vector<SpectralPoint<S>>(int count, std::uint64_t seed, double floor)> sample;
};

template <class S>
std::vector<SpectralPoint<S>> sample_spectral_points(const BasisFamily<S>& family, int count,
                                                     std::uint64_t seed, double floor) {
    if (count < 1) throw Error("sample count must be >= 1");
    return family.sample(count, seed, floor);
}

/// Psi(., P) as a column-valued lattice function, for operator application.
template <class S>
LatticeFunction<S> family_column(const BasisFamily<S>& family, const SpectralPoint<S>& P) {
    int rank = family.rank;
    auto eval = family.eval;
    return LatticeFunction<S>(family.vars, Arity{rank, 1}, [rank, eval, P](const MultiIndex& n) {
        Mat<S> col(rank, 1);
        for (int j = 0; j < rank; ++j) col(j, 0) = eval(j, n, P);
        return col;
    });
}

// ---------------------------------------------------------------------------
// Abelian families (genus 1 and 2)
// ---------------------------------------------------------------------------

struct AbelianFamilyParams {
    SiegelPoint sp;
    Eigen::VectorXcd c;    // flat-bundle parameter
    Eigen::VectorXcd x0;   // base point x
    Eigen::VectorXcd h;    // step sizes, all nonzero
    Eigen::VectorXcd beta; // translation for the rank-2 family (genus 2)
    TruncationPolicy tp;
    double divisor_floor = 1e-8;

    static AbelianFamilyParams genus1_default();
    static AbelianFamilyParams genus2_default();
};

/// Enforces h_i != 0 and dimension consistency.
void validate_abelian_params(const AbelianFamilyParams& p);

/// Rank-1 family psi(n,z) = theta(z+c+x+nh)/theta(z) *
/// prod_j (theta(z-h_j e_j)/theta(z))^{n_j}.
BasisFamily<Cplx> make_genus1_basis(const AbelianFamilyParams& p);

/// Rank-2 family: psi_1 as above, psi_2 carries the extra factor
/// theta(z+c+x+nh+beta) theta(z-beta) / theta(z)^2.
BasisFamily<Cplx> make_genus2_basis(const AbelianFamilyParams& p);

enum class EigenvalueChoice { Lambda, Mu };

/// Genus-1 eigenvalues: lambda = theta(z-h)theta(z+h)/theta^2(z),
/// mu = theta(z-h)theta^2(z+h/2)/theta^3(z).
SpectralFunction<Cplx> genus1_eigenvalue(const AbelianFamilyParams& p, EigenvalueChoice which);

/// Genus-2 eigenvalue for the chosen axis:
/// theta(z-h_a e_a)theta(z+h_a e_a)/theta^2(z).
SpectralFunction<Cplx> genus2_eigenvalue(const AbelianFamilyParams& p, int axis);

// ---------------------------------------------------------------------------
// Degenerate (Schur-polynomial) family, exact-rational
// ---------------------------------------------------------------------------

// Fixed parameters h = (1,1), x = 0, beta = (1, 1/3).
BasisFamily<Rat> make_schur_basis();
SpectralFunction<Rat> schur_eigenvalue(EigenvalueChoice which);

// ---------------------------------------------------------------------------
// Rational variety identifying [1,0] x [t] with [t] x [0,1]
// ---------------------------------------------------------------------------

template <class S>
struct OmegaParamsT {
    // coefficients (of z1w1, z1w2, z2w1, z2w2) for g, g1, g2
    std::array<S, 4> gcoef, g1coef, g2coef;
    S B, c1, c2, Lambda;
};
using OmegaParams = OmegaParamsT<Rat>;

/// The concrete instance g = z1w1 + z1w2 + z2w2, g1 = 4z1w1 + 2z1w2 + z2w2,
/// g2 = z1w1 - z1w2 + z2w2, with B = 1, c1 = 2, c2 = -1, Lambda = 1.
OmegaParams omega_default();

/// Checks g(0,1,0,1) != 0 and the two gluing identities at >= 10 random t.
template <class S>
void validate_omega_params(const OmegaParamsT<S>& p, std::uint64_t seed = 1);

/// Rank-2 family over P = (z1, z2, w1, w2).
template <class S>
BasisFamily<S> make_omega_basis(const OmegaParamsT<S>& p);

/// lambda_1 = z2 w1 / g, lambda_2 = z1 z2 w1 w2 / g^2.
template <class S>
SpectralFunction<S> omega_eigenvalue(const OmegaParamsT<S>& p, EigenvalueChoice which);

// ---------------------------------------------------------------------------
// Rational variety gluing two hypersurfaces through a linear map
// ---------------------------------------------------------------------------

template <class S>
struct GammaParamsT {
    S a1, b1, a2, b2;          // the two identified lines
    Mat<S> P;                  // g x g nondegenerate, distinct eigenvalues
    S A;                       // multiplier of f
    std::vector<S> cvec;       // multipliers c_i of f_i
    S Lambda;
    Mat<S> fcoef;              // g x 2 rows (alpha_i, beta_i): f = sum (alpha_i z1 + beta_i z2) t_i
    std::vector<Mat<S>> ficoef; // per i, g x 2 rows for f_i
};
using GammaParams = GammaParamsT<Rat>;

/// g = 2 instance with (a1,b1) = (1,0), (a2,b2) = (0,1), P = diag(2,3).
GammaParams gamma_default_g2();

template <class S>
void validate_gamma_params(const GammaParamsT<S>& p);

/// Number of coefficient unknowns minus number of gluing equations for the
/// level-k system: g * binom(g+k-1, g).
long gamma_expected_excess(int g, int k);

/// Builds the level-k solution family by per-n nullspace computation;
/// level 1 yields the rank-g basis. Throws UnexpectedNullspaceDimension when
/// the solution space has the wrong dimension.
BasisFamily<Rat> make_gamma_basis(const GammaParams& p, int k);

} // namespace cdo
