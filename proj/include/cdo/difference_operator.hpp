#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdo/lattice_function.hpp"
#include "cdo/multi_index.hpp"

namespace cdo {

// Partial difference operators D = sum_k c_k(n) T^k in g discrete variables,
// with scalar or small-matrix coefficients over an exact-rational or
// complex-float scalar field. Composition follows the skew rule
// T^a o f = f(. + a) o T^a, so the product of (f, a) and (g, b) is
// (n -> f(n) g(n+a), a+b).

/// One lattice/spectral point skipped during a window scan, with its reason.
struct Skip {
    std::string where;
    std::string reason;
};

struct ZeroCheck {
    bool is_zero = true;
    double max_residual = 0.0; // 0 when exact and zero
    bool exact = false;
    std::vector<Skip> skips;
};

template <class S>
class DifferenceOperator {
  public:
    struct Term {
        MultiIndex shift;
        LatticeFunction<S> coeff;
    };

    DifferenceOperator() : g_(0) {}
    DifferenceOperator(int g, Arity arity) : g_(g), arity_(arity) {}

    static DifferenceOperator shift_op(int g, const MultiIndex& k, int rank = 1) {
        DifferenceOperator d(g, Arity{rank, rank});
        d.add_term(k, LatticeFunction<S>::identity(g, rank));
        return d;
    }
    static DifferenceOperator identity(int g, int rank = 1) {
        return shift_op(g, MultiIndex::zero(g), rank);
    }
    static DifferenceOperator zero(int g, Arity ar) { return DifferenceOperator(g, ar); }

    int vars() const { return g_; }
    Arity arity() const { return arity_; }
    const std::vector<Term>& terms() const { return terms_; }

    std::vector<MultiIndex> support() const {
        std::vector<MultiIndex> s;
        s.reserve(terms_.size());
        for (const auto& t : terms_) s.push_back(t.shift);
        return s;
    }

    /// Adds coefficient * T^shift, merging with an existing term of the same
    /// shift; shifts stay pairwise distinct.
    void add_term(const MultiIndex& shift, LatticeFunction<S> coeff) {
        if (shift.dim() != g_) throw ArityMismatch("shift dimension mismatch");
        if (coeff.arity() != arity_) throw ArityMismatch("coefficient arity mismatch");
        auto it = std::find_if(terms_.begin(), terms_.end(),
                               [&](const Term& t) { return t.shift == shift; });
        if (it == terms_.end()) {
            terms_.push_back({shift, std::move(coeff)});
            std::sort(terms_.begin(), terms_.end(),
                      [](const Term& a, const Term& b) { return a.shift < b.shift; });
        } else {
            it->coeff = it->coeff + coeff;
        }
    }

    const LatticeFunction<S>* coefficient(const MultiIndex& shift) const {
        auto it = std::find_if(terms_.begin(), terms_.end(),
                               [&](const Term& t) { return t.shift == shift; });
        return it == terms_.end() ? nullptr : &it->coeff;
    }

    /// (D psi)(n) = sum_k coeff_k(n) psi(n + k); psi must be column-valued
    /// with psi.rows == arity.cols.
    Mat<S> apply_at(const LatticeFunction<S>& psi, const MultiIndex& n) const {
        if (psi.arity().rows != arity_.cols || psi.arity().cols != 1)
            throw ArityMismatch("operator/function arity mismatch in apply");
        Mat<S> acc = Mat<S>::zero(Arity{arity_.rows, 1});
        for (const auto& t : terms_) acc = acc + t.coeff(n) * psi(n + t.shift);
        return acc;
    }

    /// Tabulates D psi over the window. psi must be defined on the window
    /// dilated by the operator support.
    std::map<MultiIndex, Mat<S>> apply(const LatticeFunction<S>& psi,
                                       const LatticeWindow& window) const {
        std::map<MultiIndex, Mat<S>> out;
        window.for_each([&](const MultiIndex& n) { out.emplace(n, apply_at(psi, n)); });
        return out;
    }

    /// Skew composition: (A o B) psi = A (B psi).
    DifferenceOperator compose(const DifferenceOperator& B) const {
        if (g_ != B.g_) throw ArityMismatch("composing operators over different variable counts");
        if (arity_.cols != B.arity_.rows) throw ArityMismatch("operator arity mismatch in compose");
        DifferenceOperator out(g_, Arity{arity_.rows, B.arity_.cols});
        for (const auto& ta : terms_)
            for (const auto& tb : B.terms_)
                out.add_term(ta.shift + tb.shift, ta.coeff * tb.coeff.shifted(ta.shift));
        return out;
    }

    DifferenceOperator operator+(const DifferenceOperator& o) const {
        if (g_ != o.g_ || arity_ != o.arity_) throw ArityMismatch("operator sum arity mismatch");
        DifferenceOperator out = *this;
        for (const auto& t : o.terms_) out.add_term(t.shift, t.coeff);
        return out;
    }
    DifferenceOperator operator-(const DifferenceOperator& o) const {
        return *this + o.scaled(scalar_traits<S>::zero() - scalar_traits<S>::one());
    }
    DifferenceOperator scaled(const S& s) const {
        DifferenceOperator out(g_, arity_);
        for (const auto& t : terms_) out.terms_.push_back({t.shift, t.coeff.scaled(s)});
        return out;
    }

  private:
    int g_;
    Arity arity_;
    std::vector<Term> terms_; // sorted by shift, shifts pairwise distinct
};

/// AB - BA. Structurally-zero terms are retained; deciding zero is the job
/// of is_zero_on_window.
template <class S>
DifferenceOperator<S> commutator(const DifferenceOperator<S>& A, const DifferenceOperator<S>& B) {
    if (A.arity().rows != A.arity().cols || A.arity() != B.arity())
        throw ArityMismatch("commutator needs square matching arities");
    return A.compose(B) - B.compose(A);
}

/// True iff every coefficient of D at every non-pole window point has
/// magnitude <= tol; pole points are skipped and reported. For the exact
/// field tol must be exactly 0.
template <class S>
ZeroCheck is_zero_on_window(const DifferenceOperator<S>& D, const LatticeWindow& window,
                            double tol) {
    if (window.dim() != D.vars()) throw ArityMismatch("window dimension mismatch");
    if (window.size() <= 0) throw EmptyWindow("empty window");
    if (scalar_traits<S>::exact && tol != 0.0)
        throw Error("exact-field zero test requires tol == 0");
    ZeroCheck zc;
    zc.exact = scalar_traits<S>::exact;
    window.for_each([&](const MultiIndex& n) {
        for (const auto& t : D.terms()) {
            try {
                double m = t.coeff(n).max_abs();
                zc.max_residual = std::max(zc.max_residual, m);
                if (m > tol) zc.is_zero = false;
            } catch (const PoleHit& e) {
                zc.skips.push_back({"n=" + n.str() + " shift=" + t.shift.str(), e.what()});
            }
        }
    });
    return zc;
}

/// Largest coefficient magnitude over the window (pole points skipped).
template <class S>
double max_coefficient_on_window(const DifferenceOperator<S>& D, const LatticeWindow& window) {
    double m = 0.0;
    window.for_each([&](const MultiIndex& n) {
        for (const auto& t : D.terms()) {
            try {
                m = std::max(m, t.coeff(n).max_abs());
            } catch (const PoleHit&) {
            }
        }
    });
    return m;
}

/// One-directional conversion of an exact operator to the float field.
inline DifferenceOperator<Cplx> to_float_operator(const DifferenceOperator<Rat>& D) {
    DifferenceOperator<Cplx> out(D.vars(), D.arity());
    for (const auto& t : D.terms()) {
        auto coeff = t.coeff;
        out.add_term(t.shift,
                     LatticeFunction<Cplx>(
                         D.vars(), t.coeff.arity(),
                         [coeff](const MultiIndex& n) {
                             Mat<Rat> v = coeff(n);
                             Mat<Cplx> w(v.rows(), v.cols());
                             for (int i = 0; i < v.rows(); ++i)
                                 for (int j = 0; j < v.cols(); ++j) w(i, j) = to_cplx(v(i, j));
                             return w;
                         },
                         [coeff](const MultiIndex& n) { return coeff.pole_at(n); }, coeff.name()));
    }
    return out;
}

} // namespace cdo
