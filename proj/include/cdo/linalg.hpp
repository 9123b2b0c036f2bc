#pragma once

#include <vector>

#include <eigen3/Eigen/Dense>
#include <eigen3/Eigen/SVD>

#include "cdo/errors.hpp"
#include "cdo/smallmat.hpp"

namespace cdo {

// Exact linear algebra over the rational field (Gaussian elimination with
// exact pivots) and float least-squares via SVD. The exact routines are what
// make "commutator == 0" a theorem-grade statement for the rational families.

enum class SolveStatus { Unique, Ambiguous, Inconsistent };

struct ExactSolve {
    SolveStatus status;
    std::vector<Rat> solution; // defined when status == Unique
    int rank = 0;
};

/// Solves M x = b exactly. Unique requires rank == cols; an inconsistent
/// overdetermined system reports Inconsistent.
ExactSolve exact_solve(Mat<Rat> M, std::vector<Rat> b);

/// Row echelon rank of an exact matrix.
int exact_rank(Mat<Rat> M);

/// Basis of the right nullspace of M, each vector normalized so that its
/// largest-magnitude entry is 1.
std::vector<std::vector<Rat>> exact_nullspace(Mat<Rat> M);

struct FloatLeastSquares {
    Eigen::VectorXcd solution;
    double relative_residual; // |Mx - b| / max(1, |b|)
    double sv_ratio;          // sigma_min / sigma_max of M
};

FloatLeastSquares float_least_squares(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& b);

/// sigma_min / sigma_max of a complex matrix (0 for rank-deficient).
double singular_value_ratio(const Eigen::MatrixXcd& M);

/// Basis of the right nullspace of a complex matrix (SVD, tolerance-based).
std::vector<Eigen::VectorXcd> float_nullspace(const Eigen::MatrixXcd& M, double rank_tol);

} // namespace cdo
