#include "cdo/linalg.hpp"

#include <algorithm>

namespace cdo {

namespace {

// Reduces [M | b...] to row echelon form in place; returns pivot columns.
// Pivot choice: largest double magnitude in the column (exactness is not
// affected, it only moderates entry growth).
std::vector<int> echelon(Mat<Rat>& A) {
    const int rows = A.rows(), cols = A.cols();
    std::vector<int> pivots;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int best = -1;
        double best_mag = 0.0;
        for (int i = r; i < rows; ++i) {
            double m = scalar_traits<Rat>::abs(A(i, c));
            if (!A(i, c).is_zero() && (best < 0 || m > best_mag)) {
                best = i;
                best_mag = m;
            }
        }
        if (best < 0) continue;
        if (best != r)
            for (int j = 0; j < cols; ++j) std::swap(A(r, j), A(best, j));
        Rat inv_pivot = Rat(1) / A(r, c);
        for (int j = c; j < cols; ++j) A(r, j) = A(r, j) * inv_pivot;
        for (int i = 0; i < rows; ++i) {
            if (i == r || A(i, c).is_zero()) continue;
            Rat f = A(i, c);
            for (int j = c; j < cols; ++j) A(i, j) = A(i, j) - f * A(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

} // namespace

ExactSolve exact_solve(Mat<Rat> M, std::vector<Rat> b) {
    const int rows = M.rows(), cols = M.cols();
    if (static_cast<int>(b.size()) != rows) throw ArityMismatch("rhs size mismatch");
    Mat<Rat> A(rows, cols + 1);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) A(i, j) = M(i, j);
        A(i, cols) = b[static_cast<size_t>(i)];
    }
    std::vector<int> pivots = echelon(A);
    ExactSolve out;
    out.rank = 0;
    bool rhs_pivot = false;
    for (int c : pivots) {
        if (c == cols)
            rhs_pivot = true;
        else
            ++out.rank;
    }
    if (rhs_pivot) {
        out.status = SolveStatus::Inconsistent;
        return out;
    }
    if (out.rank < cols) {
        out.status = SolveStatus::Ambiguous;
        return out;
    }
    out.status = SolveStatus::Unique;
    out.solution.assign(static_cast<size_t>(cols), Rat(0));
    for (int i = 0; i < out.rank; ++i) out.solution[static_cast<size_t>(pivots[i])] = A(i, cols);
    return out;
}

int exact_rank(Mat<Rat> M) { return static_cast<int>(echelon(M).size()); }

std::vector<std::vector<Rat>> exact_nullspace(Mat<Rat> M) {
    const int cols = M.cols();
    Mat<Rat> A = M;
    std::vector<int> pivots = echelon(A);
    std::vector<bool> is_pivot(static_cast<size_t>(cols), false);
    for (int c : pivots) is_pivot[static_cast<size_t>(c)] = true;

    std::vector<std::vector<Rat>> basis;
    for (int f = 0; f < cols; ++f) {
        if (is_pivot[static_cast<size_t>(f)]) continue;
        std::vector<Rat> v(static_cast<size_t>(cols), Rat(0));
        v[static_cast<size_t>(f)] = Rat(1);
        for (size_t r = 0; r < pivots.size(); ++r)
            v[static_cast<size_t>(pivots[r])] = -A(static_cast<int>(r), f);
        // normalize: largest-magnitude entry becomes 1
        size_t imax = 0;
        double best = -1.0;
        for (size_t i = 0; i < v.size(); ++i) {
            double m = scalar_traits<Rat>::abs(v[i]);
            if (m > best) {
                best = m;
                imax = i;
            }
        }
        if (!v[imax].is_zero()) {
            Rat inv = Rat(1) / v[imax];
            for (auto& x : v) x = x * inv;
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

FloatLeastSquares float_least_squares(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& b) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    FloatLeastSquares out;
    out.sv_ratio = sv.size() == 0 || sv(0) == 0.0 ? 0.0 : sv(sv.size() - 1) / sv(0);
    out.solution = svd.solve(b);
    out.relative_residual = (M * out.solution - b).norm() / std::max(1.0, b.norm());
    return out;
}

double singular_value_ratio(const Eigen::MatrixXcd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
    return sv(sv.size() - 1) / sv(0);
}

std::vector<Eigen::VectorXcd> float_nullspace(const Eigen::MatrixXcd& M, double rank_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cutoff = (sv.size() ? sv(0) : 0.0) * rank_tol;
    std::vector<Eigen::VectorXcd> basis;
    for (int i = 0; i < M.cols(); ++i)
        if (i >= sv.size() || sv(i) <= cutoff) basis.push_back(svd.matrixV().col(i));
    return basis;
}

} // namespace cdo
