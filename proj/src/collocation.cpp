#include "cdo/builders.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace cdo {

// ---------------------------------------------------------------------------
// Collocation builder
// ---------------------------------------------------------------------------

SupportTemplate degree_template(int g, int deg) {
    SupportTemplate out;
    std::function<void(MultiIndex&, int, int)> walk = [&](MultiIndex& cur, int axis, int left) {
        if (axis == g) {
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur[axis] = v;
            walk(cur, axis + 1, left - v);
        }
    };
    MultiIndex cur = MultiIndex::zero(g);
    walk(cur, 0, deg);
    return out;
}

namespace {

template <class S>
struct CollocEngine {
    BasisFamily<S> family;
    SpectralFunction<S> lambda;
    TemplateMatrix templates;
    CollocationConfig cfg;
    int rank = 0;
    std::vector<SpectralPoint<S>> pool;
    std::vector<MultiIndex> union_shifts;

    mutable std::mutex mu;
    mutable std::map<MultiIndex, std::map<MultiIndex, Mat<S>>> cache;
    mutable std::map<MultiIndex, std::string> pole_reasons;

    int row_unknowns(int i) const {
        int u = 0;
        for (int j = 0; j < rank; ++j)
            u += static_cast<int>(templates[static_cast<size_t>(i)][static_cast<size_t>(j)].size());
        return u;
    }

    // Solves row i at lattice point n; returns the (j, shift) -> value map.
    std::map<std::pair<int, MultiIndex>, S> solve_row(int i, const MultiIndex& n) const {
        std::vector<std::pair<int, MultiIndex>> unknowns;
        for (int j = 0; j < rank; ++j)
            for (const auto& k : templates[static_cast<size_t>(i)][static_cast<size_t>(j)])
                unknowns.emplace_back(j, k);
        const int U = static_cast<int>(unknowns.size());
        const int need = cfg.samples_per_unknown * U;

        std::vector<std::vector<S>> rows;
        std::vector<S> rhs;
        for (const auto& P : pool) {
            if (static_cast<int>(rows.size()) >= need) break;
            try {
                S lam = lambda.eval(P);
                S target = lam * family.eval(i, n, P);
                std::vector<S> row;
                row.reserve(static_cast<size_t>(U));
                for (const auto& [j, k] : unknowns) row.push_back(family.eval(j, n + k, P));
                rows.push_back(std::move(row));
                rhs.push_back(std::move(target));
            } catch (const PoleHit&) {
            } catch (const DivisorProximity&) {
            }
        }
        if (static_cast<int>(rows.size()) < need)
            throw SamplingExhausted("not enough admissible spectral points for row " +
                                    std::to_string(i) + " at n=" + n.str());

        std::map<std::pair<int, MultiIndex>, S> out;
        if constexpr (scalar_traits<S>::exact) {
            Mat<S> M(need, U);
            std::vector<S> b(static_cast<size_t>(need));
            for (int r = 0; r < need; ++r) {
                for (int c = 0; c < U; ++c) M(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
                b[static_cast<size_t>(r)] = rhs[static_cast<size_t>(r)];
            }
            ExactSolve sol = exact_solve(std::move(M), std::move(b));
            if (sol.status == SolveStatus::Ambiguous)
                throw AmbiguousSolution("collocation system is rank-deficient at n=" + n.str());
            if (sol.status == SolveStatus::Inconsistent)
                throw ResidualTooLarge("no exact operator with this support at n=" + n.str());
            for (int c = 0; c < U; ++c) out[unknowns[static_cast<size_t>(c)]] = sol.solution[static_cast<size_t>(c)];
        } else {
            Eigen::MatrixXcd M(need, U);
            Eigen::VectorXcd b(need);
            for (int r = 0; r < need; ++r) {
                for (int c = 0; c < U; ++c) M(r, c) = to_cplx(rows[static_cast<size_t>(r)][static_cast<size_t>(c)]);
                b(r) = to_cplx(rhs[static_cast<size_t>(r)]);
            }
            FloatLeastSquares ls = float_least_squares(M, b);
            if (ls.sv_ratio < cfg.rank_tol)
                throw AmbiguousSolution("collocation system is rank-deficient at n=" + n.str() +
                                        " (sv ratio " + std::to_string(ls.sv_ratio) + ")");
            if (ls.relative_residual > cfg.residual_tol)
                throw ResidualTooLarge("collocation residual " + std::to_string(ls.relative_residual) +
                                       " exceeds tolerance at n=" + n.str());
            double maxc = ls.solution.cwiseAbs().maxCoeff();
            for (int c = 0; c < U; ++c) {
                Cplx v = ls.solution(c);
                if (std::abs(v) < cfg.prune_rel * maxc) v = Cplx(0.0, 0.0); // structural zero
                out[unknowns[static_cast<size_t>(c)]] = v;
            }
        }
        return out;
    }

    void solve_all(const MultiIndex& n) const {
        if (cache.count(n)) return;
        auto it = pole_reasons.find(n);
        if (it != pole_reasons.end()) throw PoleHit(it->second);
        try {
            std::map<MultiIndex, Mat<S>> by_shift;
            for (const auto& k : union_shifts) by_shift.emplace(k, Mat<S>(rank, rank));
            for (int i = 0; i < rank; ++i) {
                auto sol = solve_row(i, n);
                for (const auto& [key, value] : sol) by_shift.at(key.second)(i, key.first) = value;
            }
            cache.emplace(n, std::move(by_shift));
        } catch (const Error& e) {
            // An isolated unsolvable n is a pole of the coefficient functions
            // (the operator genuinely degenerates there); systematic template
            // failures are caught by the probe in build_collocation.
            pole_reasons.emplace(n, std::string("collocation: ") + e.what());
            throw PoleHit(pole_reasons.at(n));
        }
    }

    Mat<S> coefficient(const MultiIndex& shift, const MultiIndex& n) const {
        std::lock_guard<std::mutex> lock(mu);
        solve_all(n);
        return cache.at(n).at(shift);
    }
    bool pole_at(const MultiIndex& n) const {
        std::lock_guard<std::mutex> lock(mu);
        try {
            solve_all(n);
            return false;
        } catch (const PoleHit&) {
            return true;
        }
    }
};

} // namespace

template <class S>
DifferenceOperator<S> build_collocation(const BasisFamily<S>& family,
                                        const SpectralFunction<S>& lambda,
                                        const TemplateMatrix& templates,
                                        const CollocationConfig& cfg) {
    const int rank = family.rank;
    if (static_cast<int>(templates.size()) != rank)
        throw ArityMismatch("template matrix rows must equal the family rank");
    for (const auto& row : templates)
        if (static_cast<int>(row.size()) != rank)
            throw ArityMismatch("template matrix columns must equal the family rank");

    auto eng = std::make_shared<CollocEngine<S>>();
    eng->family = family;
    eng->lambda = lambda;
    eng->templates = templates;
    eng->cfg = cfg;
    eng->rank = rank;

    std::vector<MultiIndex> all;
    int max_unknowns = 0;
    for (int i = 0; i < rank; ++i) {
        max_unknowns = std::max(max_unknowns, eng->row_unknowns(i));
        for (int j = 0; j < rank; ++j)
            for (const auto& k : templates[static_cast<size_t>(i)][static_cast<size_t>(j)]) {
                if (k.dim() != family.vars) throw ArityMismatch("template shift dimension mismatch");
                if (std::find(all.begin(), all.end(), k) == all.end()) all.push_back(k);
            }
    }
    std::sort(all.begin(), all.end());
    eng->union_shifts = all;
    eng->pool =
        family.sample(2 * cfg.samples_per_unknown * max_unknowns + 8, cfg.seed, cfg.floor);

    // Probe two generic lattice points: failure at both with the same error
    // class signals a template problem rather than an isolated pole.
    {
        MultiIndex n1(std::vector<int>(static_cast<size_t>(family.vars), 1));
        MultiIndex n2(std::vector<int>(static_cast<size_t>(family.vars), 2));
        int failures = 0;
        std::string first_reason;
        for (const auto& n : {n1, n2}) {
            try {
                std::lock_guard<std::mutex> lock(eng->mu);
                eng->solve_all(n);
            } catch (const PoleHit& e) {
                ++failures;
                if (first_reason.empty()) first_reason = e.what();
            }
        }
        if (failures == 2) {
            if (first_reason.find("rank-deficient") != std::string::npos)
                throw AmbiguousSolution(first_reason);
            throw ResidualTooLarge(first_reason);
        }
    }

    DifferenceOperator<S> D(family.vars, Arity{rank, rank});
    for (const auto& k : all) {
        D.add_term(k, LatticeFunction<S>(
                          family.vars, Arity{rank, rank},
                          [eng, k](const MultiIndex& n) { return eng->coefficient(k, n); },
                          [eng](const MultiIndex& n) { return eng->pole_at(n); },
                          "collocation T^" + k.str()));
    }
    return D;
}

template DifferenceOperator<Rat> build_collocation<Rat>(const BasisFamily<Rat>&,
                                                        const SpectralFunction<Rat>&,
                                                        const TemplateMatrix&,
                                                        const CollocationConfig&);
template DifferenceOperator<Cplx> build_collocation<Cplx>(const BasisFamily<Cplx>&,
                                                          const SpectralFunction<Cplx>&,
                                                          const TemplateMatrix&,
                                                          const CollocationConfig&);

// ---------------------------------------------------------------------------
// Exact transcriptions: degenerate pair
// ---------------------------------------------------------------------------

namespace {

Rat rdiv(const Rat& a, const Rat& b) {
    if (b.is_zero()) throw PoleHit("printed-formula denominator vanishes");
    return a / b;
}

// The displayed coefficient formulas for the degenerate pair as exact
// rational functions of (n1, n2); zero denominators throw PoleHit.
struct SchurFormulas {
    // lambda-direction operator
    static Rat u1(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat num = Rat(-2) * N1 * N1 * (N1 + 1) * (N1 + 2) * (N1 * (N1 + 3) + 5) +
                  Rat(6) * N2 * (Rat(2) * N1 * (N1 + 1) * (N1 + 2) - 3) - Rat(18) * N2 * N2;
        Rat den = (N1 + 2) * (Rat(6) * N2 + N1 * (N1 * (N1 + 6) + 13) + 14);
        return rdiv(num, den);
    }
    static Rat v20(long n1, long n2) { return -u1(n1, n2) - rdiv(Rat(n1), Rat(n1 + 2)); }
    static Rat v11(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat num = (N1 + 2) * (Rat(2) * N1 * (N1 + 1) - u1(n1, n2) * (N1 + 3)) - Rat(6) * N2;
        return rdiv(num, Rat(3) * (N1 + 2) * (N1 + 1));
    }
    static Rat v1(long n1, long n2) { return Rat(2) - v11(n1, n2) - rdiv(Rat(2), Rat(n1 + 2)); }

    static Rat p1(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat num = Rat(2) * (Rat::pow(N1, 6) + Rat(9) * Rat::pow(N1, 5) + Rat(37) * Rat::pow(N1, 4) +
                            Rat(48) + N1 * N1 * (Rat(106) - Rat(27) * N2)) +
                  Rat(2) * (N1 * (Rat(88) - Rat(21) * N2) + Rat::pow(N1, 3) * (Rat(83) - Rat(6) * N2) +
                            Rat(21) * N2 + Rat(9) * N2 * N2);
        Rat den = Rat(3) * (N1 + 2) *
                  (Rat::pow(N1, 3) + Rat(6) * N1 * N1 + Rat(13) * N1 + Rat(6) * N2 + 14);
        return rdiv(num, den);
    }
    static Rat q12(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat num = Rat(2) * (Rat(46) + Rat(61) * Rat::pow(N1, 4) + Rat(12) * Rat::pow(N1, 5) +
                            Rat::pow(N1, 6) + N1 * (Rat(161) - Rat(66) * N2)) +
                  Rat(2) * (Rat::pow(N1, 3) * (Rat(163) - Rat(6) * N2) - Rat(21) * N2 +
                            Rat(9) * N2 * N2 - Rat(4) * N1 * N1 * (Rat(9) * N2 - 58));
        Rat den = Rat(9) * (N1 + 2) * (Rat::pow(N1, 3) + Rat(6) * N1 * N1 + Rat(13) * N1 + 20);
        return rdiv(num, den);
    }
    static Rat p11(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat num = Rat(2) * (Rat(5) + N1 * (Rat(11) + N1 * (N1 + 6)) - Rat(3) * N2) -
                  Rat(9) * (N1 + 1) * (N1 + 2) * q12(n1, n2);
        return rdiv(num, Rat(3) * (N1 + 2) * (N1 + 3));
    }
    static Rat p20(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat num = Rat(-2) * Rat::pow(N1, 6) - Rat(24) * Rat::pow(N1, 5) - Rat(123) * Rat::pow(N1, 4) +
                  Rat(12) * Rat::pow(N1, 3) * (N2 - 28) + N1 * N1 * (Rat(72) * N2 - 501) +
                  Rat(6) * N1 * (Rat(21) * N2 - 64) - Rat(18) * (N2 * N2 - Rat(2) * N2 + 7);
        Rat den = (N1 + 3) *
                  (Rat::pow(N1, 3) + Rat(9) * N1 * N1 + Rat(28) * N1 + Rat(6) * N2 + 34);
        return rdiv(num, den);
    }
    // The displayed q1 references an undefined symbol; `p12_reading` supplies
    // the value substituted for it.
    static Rat q1_with(long n1, long n2, const Rat& p12_reading) {
        Rat N1(n1);
        Rat num = Rat(3) * p12_reading + Rat(3) * p1(n1, n2) - Rat(4) +
                  N1 * (p11(n1, n2) + p1(n1, n2) - 2);
        return rdiv(num, Rat(3) * (N1 + 1)) + q12(n1, n2);
    }
    static Rat q11_from(const Rat& q1v, long n1, long n2) { return -q1v - q12(n1, n2); }
    static Rat q30(long n1, long n2) {
        return rdiv(Rat(2), Rat(n1 + 3)) - p20(n1, n2) - Rat(1);
    }
    static Rat q21(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat num = Rat(9) * (N1 * (N1 * (N1 + 3) + 3) - Rat(3) * N2 - 5) * q12(n1, n2) +
                  (Rat::pow(N1 + 3, 3) - Rat(3) * N2) * q30(n1, n2);
        Rat den = Rat(3) * (Rat(5) + N1 * (N1 * (N1 + 6) + 12) - Rat(3) * N2);
        return rdiv(num, den);
    }
    static Rat q20_from(const Rat& q1v, long n1, long n2) {
        Rat N1(n1);
        return rdiv(Rat(3) * (N1 + 1) * (q12(n1, n2) - q1v), Rat(n1 + 3)) - q21(n1, n2);
    }

    // mu-direction operator
    static Rat f11(long n1, long n2) {
        Rat N1(n1), N2(n2);
        return rdiv(Rat(18) * N1, N1 * (N1 * (N1 + 3) + 4) + Rat(6) * (N2 + 2));
    }
    static Rat f02(long n1, long n2) {
        return rdiv(f11(n1, n2) * Rat(n1 + 2), Rat(3 * n1)) - Rat(1);
    }
    static Rat f2(long n1, long n2) { return Rat(1) - f02(n1, n2); }
    static Rat g2(long n1, long n2) { return -f11(n1, n2); }

    static Rat r21(long n1, long n2) {
        Rat N1(n1), N2(n2);
        return rdiv(Rat(18) * (N1 + 1),
                    Rat::pow(N1, 3) + Rat(6) * N1 * N1 + Rat(13) * N1 + 20 + Rat(6) * N2);
    }
    static Rat r03(long n1, long n2) {
        Rat N1(n1), N2(n2);
        return rdiv(Rat(2) * (N1 + 2),
                    Rat::pow(N1, 3) + Rat(3) * N1 * N1 + Rat(4) * N1 + Rat(6) * (N2 + 2));
    }
    static Rat r12(long n1, long n2) {
        Rat N1(n1);
        Rat a = r03(n1, n2), b = r21(n1, n2);
        Rat num = Rat(9) * N1 * a + Rat(9) * N1 * N1 * a + Rat(6) * b + Rat(5) * N1 * b + N1 * N1 * b;
        return rdiv(num, Rat(3) * N1 * N1 + Rat(9) * N1 + 6);
    }
    static Rat r11(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat a = r03(n1, n2), b = r21(n1, n2), c = r12(n1, n2);
        Rat num = -Rat::pow(N1, 3) * c - Rat(6) * (N2 + 2) * c +
                  N1 * N1 * (Rat(9) * a - Rat(6) * c + b) + N1 * (Rat(3) * b - Rat(9) * a - Rat(7) * c);
        Rat den = Rat::pow(N1, 3) + Rat(3) * N1 * N1 + Rat(4) * N1 + Rat(6) * (N2 + 2);
        return rdiv(num, den);
    }
    static Rat r02(long n1, long n2) {
        Rat N1(n1), N2(n2);
        Rat num = Rat(-2) * (Rat::pow(N1, 3) + Rat(3) * N1 * N1 + Rat(4) * N1 + 15 + Rat(6) * N2) *
                  r03(n1, n2);
        Rat den = Rat::pow(N1, 3) + Rat(3) * N1 * N1 + Rat(4) * N1 + Rat(6) * (N2 + 2);
        return rdiv(num, den);
    }
    static Rat r2(long n1, long n2) { return -r02(n1, n2) - r03(n1, n2); }
    static Rat j11(long n1, long n2) { return -r21(n1, n2); }
    static Rat j02(long n1, long n2) {
        Rat N1(n1);
        return rdiv(-(Rat(2) + N1 + Rat(3) * N1 * r03(n1, n2)), N1 + Rat(2));
    }
    static Rat j2(long n1, long n2) {
        Rat N1(n1);
        Rat num = N1 + Rat(2) - j02(n1, n2) * (N1 + 2) - Rat(3) * N1 * r02(n1, n2) -
                  Rat(6) * N1 * r03(n1, n2);
        return rdiv(num, N1 + Rat(2));
    }
};

using Formula = std::function<Rat(long, long)>;

LatticeFunction<Rat> formula_matrix(int g, std::map<std::pair<int, int>, Formula> entries,
                                    std::string name) {
    auto eval = [entries](const MultiIndex& n) {
        Mat<Rat> m(2, 2);
        for (const auto& [rc, f] : entries) m(rc.first, rc.second) = f(n[0], n[1]);
        return m;
    };
    auto pole = [entries](const MultiIndex& n) {
        try {
            for (const auto& [rc, f] : entries) f(n[0], n[1]);
            return false;
        } catch (const PoleHit&) {
            return true;
        }
    };
    return LatticeFunction<Rat>(g, Arity{2, 2}, eval, pole, std::move(name));
}

// Exact coefficient lookup in a collocation-built operator.
Rat colloc_entry(const DifferenceOperator<Rat>& D, const MultiIndex& shift, int i, int j,
                 const MultiIndex& n) {
    const auto* c = D.coefficient(shift);
    if (!c) return Rat(0);
    return (*c)(n)(i, j);
}

} // namespace

SchurPair build_schur_pair(const LatticeWindow& compare_window, const CollocationConfig& cfg) {
    SchurPair out;
    auto family = make_schur_basis();
    TemplateMatrix templates = {
        {degree_template(2, 2), degree_template(2, 1)},
        {degree_template(2, 3), degree_template(2, 2)},
    };
    out.L_lambda = build_collocation(family, schur_eigenvalue(EigenvalueChoice::Lambda), templates, cfg);
    out.L_mu = build_collocation(family, schur_eigenvalue(EigenvalueChoice::Mu), templates, cfg);

    const MultiIndex e1 = MultiIndex::unit(2, 0), e2 = MultiIndex::unit(2, 1);
    using F = SchurFormulas;

    // q1 slot of the printed lambda operator comes from collocation (its
    // displayed formula references a symbol that is never defined).
    auto L_lambda_ptr = std::make_shared<DifferenceOperator<Rat>>(out.L_lambda);
    Formula q1_colloc = [L_lambda_ptr, e1](long n1, long n2) {
        MultiIndex n({std::vector<int>{static_cast<int>(n1), static_cast<int>(n2)}});
        const auto* c = L_lambda_ptr->coefficient(e1);
        return (*c)(n)(1, 0);
    };

    out.L_lambda_printed = DifferenceOperator<Rat>(2, Arity{2, 2});
    out.L_lambda_printed.add_term(e1, formula_matrix(2,
                                                     {{{0, 0}, F::v1},
                                                      {{0, 1}, F::u1},
                                                      {{1, 0}, q1_colloc},
                                                      {{1, 1}, F::p1}},
                                                     "T^(1,0)"));
    out.L_lambda_printed.add_term(
        e1 + e2, formula_matrix(2,
                                {{{0, 0}, F::v11},
                                 {{1, 0}, [q1_colloc](long n1, long n2) {
                                      return F::q11_from(q1_colloc(n1, n2), n1, n2);
                                  }},
                                 {{1, 1}, F::p11}},
                                "T^(1,1)"));
    out.L_lambda_printed.add_term(
        e1 + e1, formula_matrix(2,
                                {{{0, 0}, F::v20},
                                 {{1, 0}, [q1_colloc](long n1, long n2) {
                                      return F::q20_from(q1_colloc(n1, n2), n1, n2);
                                  }},
                                 {{1, 1}, F::p20}},
                                "T^(2,0)"));
    out.L_lambda_printed.add_term(e1 + e2 + e2, formula_matrix(2, {{{1, 0}, F::q12}}, "T^(1,2)"));
    out.L_lambda_printed.add_term(e1 + e1 + e2, formula_matrix(2, {{{1, 0}, F::q21}}, "T^(2,1)"));
    out.L_lambda_printed.add_term(e1 + e1 + e1, formula_matrix(2, {{{1, 0}, F::q30}}, "T^(3,0)"));

    out.L_mu_printed = DifferenceOperator<Rat>(2, Arity{2, 2});
    out.L_mu_printed.add_term(e2, formula_matrix(2,
                                                 {{{0, 0}, F::f2},
                                                  {{0, 1}, F::g2},
                                                  {{1, 0}, F::r2},
                                                  {{1, 1}, F::j2}},
                                                 "T^(0,1)"));
    out.L_mu_printed.add_term(e1 + e2, formula_matrix(2,
                                                      {{{0, 0}, F::f11},
                                                       {{1, 0}, F::r11},
                                                       {{1, 1}, F::j11}},
                                                      "T^(1,1)"));
    out.L_mu_printed.add_term(e2 + e2, formula_matrix(2,
                                                      {{{0, 0}, F::f02},
                                                       {{1, 0}, F::r02},
                                                       {{1, 1}, F::j02}},
                                                      "T^(0,2)"));
    out.L_mu_printed.add_term(e1 + e1 + e2, formula_matrix(2, {{{1, 0}, F::r21}}, "T^(2,1)"));
    out.L_mu_printed.add_term(e1 + e2 + e2, formula_matrix(2, {{{1, 0}, F::r12}}, "T^(1,2)"));
    out.L_mu_printed.add_term(e2 + e2 + e2, formula_matrix(2, {{{1, 0}, F::r03}}, "T^(0,3)"));

    // Compare every displayed formula against the collocation coefficients.
    struct Named {
        const char* name;
        const DifferenceOperator<Rat>* oracle;
        MultiIndex shift;
        int i, j;
        Formula formula;
    };
    std::vector<Named> named = {
        {"u1", &out.L_lambda, e1, 0, 1, F::u1},
        {"v1", &out.L_lambda, e1, 0, 0, F::v1},
        {"v11", &out.L_lambda, e1 + e2, 0, 0, F::v11},
        {"v20", &out.L_lambda, e1 + e1, 0, 0, F::v20},
        {"p1", &out.L_lambda, e1, 1, 1, F::p1},
        {"p11", &out.L_lambda, e1 + e2, 1, 1, F::p11},
        {"p20", &out.L_lambda, e1 + e1, 1, 1, F::p20},
        {"q12", &out.L_lambda, e1 + e2 + e2, 1, 0, F::q12},
        {"q21", &out.L_lambda, e1 + e1 + e2, 1, 0, F::q21},
        {"q30", &out.L_lambda, e1 + e1 + e1, 1, 0, F::q30},
        {"q11", &out.L_lambda, e1 + e2, 1, 0,
         [q1_colloc](long n1, long n2) { return F::q11_from(q1_colloc(n1, n2), n1, n2); }},
        {"q20", &out.L_lambda, e1 + e1, 1, 0,
         [q1_colloc](long n1, long n2) { return F::q20_from(q1_colloc(n1, n2), n1, n2); }},
        {"f11", &out.L_mu, e1 + e2, 0, 0, F::f11},
        {"f02", &out.L_mu, e2 + e2, 0, 0, F::f02},
        {"f2", &out.L_mu, e2, 0, 0, F::f2},
        {"g2", &out.L_mu, e2, 0, 1, F::g2},
        {"r21", &out.L_mu, e1 + e1 + e2, 1, 0, F::r21},
        {"r12", &out.L_mu, e1 + e2 + e2, 1, 0, F::r12},
        {"r03", &out.L_mu, e2 + e2 + e2, 1, 0, F::r03},
        {"r11", &out.L_mu, e1 + e2, 1, 0, F::r11},
        {"r02", &out.L_mu, e2 + e2, 1, 0, F::r02},
        {"r2", &out.L_mu, e2, 1, 0, F::r2},
        {"j11", &out.L_mu, e1 + e2, 1, 1, F::j11},
        {"j02", &out.L_mu, e2 + e2, 1, 1, F::j02},
        {"j2", &out.L_mu, e2, 1, 1, F::j2},
    };
    for (const auto& nm : named) {
        CoefficientComparison cmp;
        cmp.name = nm.name;
        compare_window.for_each([&](const MultiIndex& n) {
            try {
                Rat printed = nm.formula(n[0], n[1]);
                Rat oracle = colloc_entry(*nm.oracle, nm.shift, nm.i, nm.j, n);
                ++cmp.points_compared;
                if (printed != oracle) cmp.all_match = false;
            } catch (const PoleHit&) {
                ++cmp.points_skipped;
            }
        });
        out.comparisons.push_back(cmp);
    }

    // Diagnose the undefined symbol in the displayed q1: try reading it as
    // p11 and as q12, and report which (if either) reproduces collocation.
    out.q1_matches_p11_reading = true;
    out.q1_matches_q12_reading = true;
    int q1_points = 0;
    compare_window.for_each([&](const MultiIndex& n) {
        try {
            Rat oracle = q1_colloc(n[0], n[1]);
            Rat with_p11 = F::q1_with(n[0], n[1], F::p11(n[0], n[1]));
            Rat with_q12 = F::q1_with(n[0], n[1], F::q12(n[0], n[1]));
            ++q1_points;
            if (with_p11 != oracle) out.q1_matches_p11_reading = false;
            if (with_q12 != oracle) out.q1_matches_q12_reading = false;
        } catch (const PoleHit&) {
        }
    });
    out.undefined_symbol_note =
        "the displayed T^(1,0) coefficient of the (2,1) entry references an undefined symbol; "
        "compared " + std::to_string(q1_points) + " points: reading it as the (2,2) T^(1,1) "
        "coefficient " + (out.q1_matches_p11_reading ? "matches" : "does NOT match") +
        " collocation, reading it as the (2,1) T^(1,2) coefficient " +
        (out.q1_matches_q12_reading ? "matches" : "does NOT match") + " collocation";
    return out;
}

// ---------------------------------------------------------------------------
// Exact transcription: omega pair
// ---------------------------------------------------------------------------

namespace {

// Shorthand used by the transcribed coefficients.
Rat m1n2(long n2) { return sign_pow(n2); } // (-1)^{n2}

struct OmegaFormulas {
    // first operator (eigenvalue z2 w1 / g)
    static Rat b1(long n1, long) { return rdiv(Rat(3), pow2(2 + 2 * n1) - Rat(1)); }
    static Rat a2(long n1, long n2) {
        return Rat(-1) + (Rat(-2) + m1n2(n2) * pow2(n1) + Rat(3) * pow2(1 + 2 * n1)) * b1(n1, n2);
    }
    static Rat a(long n1, long n2) { return Rat(-4) - a2(n1, n2) - b1(n1, n2); }
    static Rat b2(long n1, long n2) {
        Rat num = Rat(3) * (Rat(-1) + m1n2(n2) * pow2(1 + n1));
        Rat den = (Rat(1) + m1n2(n2) * pow2(n1)) * (pow2(2 + 2 * n1) - Rat(1));
        return rdiv(num, den);
    }
    static Rat b(long n1, long n2) { return Rat(-4) * b1(n1, n2) - b2(n1, n2); }
    static Rat d1(long n1, long) {
        return rdiv(pow2(2 * n1) - Rat(1), pow2(2 + 2 * n1) - Rat(1));
    }
    static Rat c2(long n1, long n2) {
        return (Rat(1) - m1n2(n2) * pow2(n1)) / Rat(2) +
               (Rat(-2) + m1n2(n2) * pow2(n1) + Rat(3) * pow2(1 + 2 * n1)) * d1(n1, n2);
    }
    static Rat c(long n1, long n2) { return Rat(1) - c2(n1, n2) - d1(n1, n2); }
    static Rat d2(long n1, long n2) {
        Rat num = (Rat(-1) + m1n2(n2) * pow2(1 + n1)) * d1(n1, n2);
        return rdiv(num, Rat(1) + m1n2(n2) * pow2(n1));
    }
    static Rat d(long n1, long n2) { return Rat(-4) * d1(n1, n2) - d2(n1, n2); }

    // second operator (eigenvalue z1 z2 w1 w2 / g^2)
    static Rat bp12(long n1, long) { return rdiv(Rat(3), Rat(2) * (pow2(2 + 2 * n1) - Rat(1))); }
    static Rat bp2(long n1, long) { return rdiv(Rat(3), pow2(2 * n1) - Rat(1)); }
    static Rat ap22(long n1, long n2) {
        Rat s = m1n2(n2);
        return (Rat(1) - Rat(4) * (Rat(1) + s * pow2(1 + 3 * n1) - Rat(3) * pow2(2 * n1)) * bp12(n1, n2) +
                s * pow2(n1) * bp2(n1, n2) - s * pow2(3 * n1) * bp2(n1, n2)) /
               Rat(2);
    }
    static Rat ap2(long n1, long n2) {
        return Rat(2) - Rat(2) * ap22(n1, n2) - bp12(n1, n2) -
               Rat(2) * m1n2(n2) * pow2(n1) * bp12(n1, n2);
    }
    static Rat ap(long n1, long n2) { return -ap2(n1, n2) - ap22(n1, n2); }
    static Rat bp22(long n1, long n2) {
        Rat s = m1n2(n2);
        return (Rat(-4) * (Rat(1) + s * pow2(1 + n1)) * bp12(n1, n2) -
                (Rat(1) + s * pow2(n1)) * bp2(n1, n2)) /
               Rat(2);
    }
    static Rat bp1(long n1, long n2) { return -bp12(n1, n2); }
    static Rat bp(long n1, long n2) { return -bp2(n1, n2) - bp22(n1, n2); }
    static Rat dp12(long n1, long) {
        return rdiv(pow2(2 * n1) - Rat(1), Rat(2) * (pow2(2 + 2 * n1) - Rat(1)));
    }
    static Rat cp22(long n1, long n2) {
        Rat s = m1n2(n2);
        Rat inner = Rat(-1) + (Rat(-8) - s * pow2(3 + n1) + pow2(4 + 2 * n1)) * dp12(n1, n2) +
                    s * pow2(1 + n1) * (Rat(1) + s * pow2(n1));
        return Rat(-1, 4) * (Rat(-1) + s * pow2(n1)) * inner;
    }
    static Rat cp2(long n1, long n2) {
        return Rat(-1, 2) - Rat(2) * cp22(n1, n2) -
               (Rat(1) + m1n2(n2) * pow2(1 + n1)) * dp12(n1, n2);
    }
    static Rat cp(long n1, long n2) { return -cp2(n1, n2) - cp22(n1, n2); }
    static Rat dp1(long n1, long n2) { return -dp12(n1, n2); }
    static Rat dp22(long n1, long n2) {
        Rat s = m1n2(n2);
        return (Rat(-4) * (Rat(1) + s * pow2(1 + n1)) * dp12(n1, n2) - (Rat(1) + s * pow2(n1))) /
               Rat(2);
    }
    static Rat dp(long n1, long n2) { return Rat(-1) - dp22(n1, n2); }
};

} // namespace

OmegaPair build_omega_pair(const OmegaParams& p) {
    OmegaParams std_p = omega_default();
    bool is_default = p.gcoef == std_p.gcoef && p.g1coef == std_p.g1coef &&
                      p.g2coef == std_p.g2coef && p.B == std_p.B && p.c1 == std_p.c1 &&
                      p.c2 == std_p.c2 && p.Lambda == std_p.Lambda;
    if (!is_default)
        throw Error("transcribed omega operators exist only for the concrete default instance; "
                    "use the collocation builder for other parameters");
    validate_omega_params(p);

    const MultiIndex e1 = MultiIndex::unit(2, 0), e2 = MultiIndex::unit(2, 1), z = MultiIndex::zero(2);
    using F = OmegaFormulas;
    auto K = [](Rat v) { return [v](long, long) { return v; }; };

    OmegaPair out;
    out.D1 = DifferenceOperator<Rat>(2, Arity{2, 2});
    out.D1.add_term(e1, formula_matrix(2,
                                       {{{0, 0}, K(Rat(1))}, {{0, 1}, F::b1}, {{1, 1}, F::d1}},
                                       "T^(1,0)"));
    out.D1.add_term(e2, formula_matrix(2,
                                       {{{0, 0}, F::a2},
                                        {{0, 1}, F::b2},
                                        {{1, 0}, F::c2},
                                        {{1, 1}, F::d2}},
                                       "T^(0,1)"));
    out.D1.add_term(z, formula_matrix(2,
                                      {{{0, 0}, F::a}, {{0, 1}, F::b}, {{1, 0}, F::c}, {{1, 1}, F::d}},
                                      "T^(0,0)"));

    out.D2 = DifferenceOperator<Rat>(2, Arity{2, 2});
    out.D2.add_term(e1 + e2, formula_matrix(2,
                                            {{{0, 0}, K(Rat(-1, 2))},
                                             {{0, 1}, F::bp12},
                                             {{1, 1}, F::dp12}},
                                            "T^(1,1)"));
    out.D2.add_term(e2 + e2, formula_matrix(2,
                                            {{{0, 0}, F::ap22},
                                             {{0, 1}, F::bp22},
                                             {{1, 0}, F::cp22},
                                             {{1, 1}, F::dp22}},
                                            "T^(0,2)"));
    out.D2.add_term(e1, formula_matrix(2,
                                       {{{0, 0}, K(Rat(1, 2))}, {{0, 1}, F::bp1}, {{1, 1}, F::dp1}},
                                       "T^(1,0)"));
    out.D2.add_term(e2, formula_matrix(2,
                                       {{{0, 0}, F::ap2},
                                        {{0, 1}, F::bp2},
                                        {{1, 0}, F::cp2},
                                        {{1, 1}, K(Rat(1))}},
                                       "T^(0,1)"));
    out.D2.add_term(z, formula_matrix(2,
                                      {{{0, 0}, F::ap},
                                       {{0, 1}, F::bp},
                                       {{1, 0}, F::cp},
                                       {{1, 1}, F::dp}},
                                      "T^(0,0)"));
    return out;
}

} // namespace cdo
