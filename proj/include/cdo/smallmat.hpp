#pragma once

#include <utility>
#include <vector>

#include "cdo/errors.hpp"
#include "cdo/scalar.hpp"

namespace cdo {

/// (rows, cols) of a coefficient value; (1,1) for scalar operators.
struct Arity {
    int rows = 1;
    int cols = 1;
    bool operator==(const Arity& o) const { return rows == o.rows && cols == o.cols; }
    bool operator!=(const Arity& o) const { return !(*this == o); }
};

/// Dense matrix over the scalar S, sized for small ranks (N <= 6 in practice).
template <class S>
class Mat {
  public:
    Mat() : r_(0), c_(0) {}
    Mat(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<size_t>(rows) * cols, scalar_traits<S>::zero()) {}
    static Mat zero(Arity ar) { return Mat(ar.rows, ar.cols); }
    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = scalar_traits<S>::one();
        return m;
    }
    static Mat scalar1x1(S v) {
        Mat m(1, 1);
        m(0, 0) = std::move(v);
        return m;
    }

    int rows() const { return r_; }
    int cols() const { return c_; }
    Arity arity() const { return {r_, c_}; }
    S& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }
    const S& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }

    Mat operator+(const Mat& o) const {
        check_same(o);
        Mat m = *this;
        for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = m.a_[i] + o.a_[i];
        return m;
    }
    Mat operator-(const Mat& o) const {
        check_same(o);
        Mat m = *this;
        for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = m.a_[i] - o.a_[i];
        return m;
    }
    Mat operator*(const Mat& o) const {
        if (c_ != o.r_) throw ArityMismatch("matrix product shape mismatch");
        Mat m(r_, o.c_);
        for (int i = 0; i < r_; ++i)
            for (int k = 0; k < c_; ++k) {
                const S& v = (*this)(i, k);
                if (scalar_traits<S>::is_zero(v)) continue;
                for (int j = 0; j < o.c_; ++j) m(i, j) += v * o(k, j);
            }
        return m;
    }
    Mat scaled(const S& s) const {
        Mat m = *this;
        for (auto& v : m.a_) v = v * s;
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, scalar_traits<S>::abs(v));
        return m;
    }
    bool is_exact_zero() const {
        for (const auto& v : a_)
            if (!scalar_traits<S>::is_zero(v)) return false;
        return true;
    }

  private:
    void check_same(const Mat& o) const {
        if (r_ != o.r_ || c_ != o.c_) throw ArityMismatch("matrix shape mismatch");
    }
    int r_, c_;
    std::vector<S> a_;
};

template <class S>
using ColVec = Mat<S>; // column vectors are (N,1) matrices

} // namespace cdo
