#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "cdo/errors.hpp"
#include "cdo/multi_index.hpp"
#include "cdo/smallmat.hpp"

namespace cdo {

/// A coefficient: a map from lattice points n in Z^g to matrix values, with
/// an explicit pole set. Evaluating at a pole throws PoleHit; values are
/// never silent NaNs.
template <class S>
class LatticeFunction {
  public:
    using Value = Mat<S>;
    using EvalFn = std::function<Value(const MultiIndex&)>;
    using PoleFn = std::function<bool(const MultiIndex&)>;

    LatticeFunction() : g_(0) {}
    LatticeFunction(int g, Arity ar, EvalFn eval, PoleFn pole = {}, std::string name = "")
        : g_(g), arity_(ar), eval_(std::move(eval)), pole_(std::move(pole)), name_(std::move(name)) {}

    static LatticeFunction constant(int g, Value v) {
        Arity ar = v.arity();
        return LatticeFunction(g, ar, [v](const MultiIndex&) { return v; });
    }
    static LatticeFunction zero(int g, Arity ar) { return constant(g, Value::zero(ar)); }
    static LatticeFunction one(int g) { return constant(g, Value::identity(1)); }
    static LatticeFunction identity(int g, int n) { return constant(g, Value::identity(n)); }
    /// Scalar-valued coefficient from a plain function n -> S.
    static LatticeFunction scalar(int g, std::function<S(const MultiIndex&)> f, PoleFn pole = {},
                                  std::string name = "") {
        return LatticeFunction(
            g, Arity{1, 1},
            [f = std::move(f)](const MultiIndex& n) { return Value::scalar1x1(f(n)); },
            std::move(pole), std::move(name));
    }

    int vars() const { return g_; }
    Arity arity() const { return arity_; }
    const std::string& name() const { return name_; }
    bool defined() const { return static_cast<bool>(eval_); }

    bool pole_at(const MultiIndex& n) const { return pole_ && pole_(n); }

    Value operator()(const MultiIndex& n) const {
        if (!eval_) throw Error("evaluating an empty lattice function");
        if (pole_at(n))
            throw PoleHit((name_.empty() ? std::string("coefficient") : name_) +
                          " has a pole at n=" + n.str());
        return eval_(n);
    }

    /// f(n + shift) as a lattice function; pole set shifts along.
    LatticeFunction shifted(const MultiIndex& shift) const {
        auto ev = eval_;
        auto po = pole_;
        return LatticeFunction(
            g_, arity_, [ev, shift](const MultiIndex& n) { return ev(n + shift); },
            po ? PoleFn([po, shift](const MultiIndex& n) { return po(n + shift); }) : PoleFn{},
            name_);
    }

    LatticeFunction operator+(const LatticeFunction& o) const {
        require_compatible(o, arity_ == o.arity_);
        return combine(o, arity_, [](const Value& a, const Value& b) { return a + b; });
    }
    LatticeFunction operator-(const LatticeFunction& o) const {
        require_compatible(o, arity_ == o.arity_);
        return combine(o, arity_, [](const Value& a, const Value& b) { return a - b; });
    }
    /// Pointwise product this(n) * o(n); used by skew composition after
    /// shifting the right factor.
    LatticeFunction operator*(const LatticeFunction& o) const {
        require_compatible(o, arity_.cols == o.arity_.rows);
        return combine(o, Arity{arity_.rows, o.arity_.cols},
                       [](const Value& a, const Value& b) { return a * b; });
    }
    LatticeFunction scaled(const S& s) const {
        auto ev = eval_;
        return LatticeFunction(
            g_, arity_, [ev, s](const MultiIndex& n) { return ev(n).scaled(s); }, pole_, name_);
    }

  private:
    void require_compatible(const LatticeFunction& o, bool arity_ok) const {
        if (g_ != o.g_) throw ArityMismatch("lattice functions over different variable counts");
        if (!arity_ok) throw ArityMismatch("lattice function arity mismatch");
    }
    LatticeFunction combine(const LatticeFunction& o, Arity out,
                            std::function<Value(const Value&, const Value&)> op) const {
        auto ea = eval_, eb = o.eval_;
        auto pa = pole_, pb = o.pole_;
        PoleFn pole;
        if (pa || pb)
            pole = [pa, pb](const MultiIndex& n) {
                return (pa && pa(n)) || (pb && pb(n)); // union of contributing pole sets
            };
        return LatticeFunction(
            g_, out,
            [ea, eb, op = std::move(op)](const MultiIndex& n) { return op(ea(n), eb(n)); },
            std::move(pole));
    }

    int g_;
    Arity arity_;
    EvalFn eval_;
    PoleFn pole_;
    std::string name_;
};

} // namespace cdo
