#include "cdo/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace cdo {

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

std::string point_str(const MultiIndex& n) { return "n=" + n.str(); }

template <class S>
std::string spectral_str(const SpectralPoint<S>& P, int index) {
    (void)P;
    return "P#" + std::to_string(index);
}

} // namespace

void VerificationReport::sort_by_name() {
    std::sort(checks.begin(), checks.end(),
              [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
}

template <class S>
CheckResult check_eigen(std::string name, const DifferenceOperator<S>& D,
                        const BasisFamily<S>& family, const SpectralFunction<S>& lambda,
                        const LatticeWindow& window, const std::vector<SpectralPoint<S>>& points,
                        double tol) {
    Stopwatch sw;
    CheckResult cr;
    cr.name = std::move(name);
    cr.threshold = tol;
    cr.exact_mode = scalar_traits<S>::exact;
    cr.exact_zero = true;
    cr.points_total = window.size() * static_cast<long>(points.size());

    if (D.arity().rows != family.rank || D.arity().cols != family.rank)
        throw ArityMismatch("operator and family rank mismatch");

    double max_res = 0.0;
    int pidx = 0;
    for (const auto& P : points) {
        ++pidx;
        S lam;
        try {
            lam = lambda.eval(P);
        } catch (const PoleHit& e) {
            window.for_each([&](const MultiIndex& n) { cr.skips.push_back({point_str(n) + " " + spectral_str(P, pidx), e.what()}); });
            continue;
        }
        LatticeFunction<S> psi = family_column(family, P);
        window.for_each([&](const MultiIndex& n) {
            try {
                Mat<S> lhs = D.apply_at(psi, n);
                Mat<S> rhs = psi(n).scaled(lam);
                for (int i = 0; i < family.rank; ++i) {
                    S diff = lhs(i, 0) - rhs(i, 0);
                    if (!scalar_traits<S>::is_zero(diff)) cr.exact_zero = false;
                    double denom = std::max(1.0, scalar_traits<S>::abs(rhs(i, 0)));
                    max_res = std::max(max_res, scalar_traits<S>::abs(diff) / denom);
                }
            } catch (const PoleHit& e) {
                cr.skips.push_back({point_str(n) + " " + spectral_str(P, pidx), e.what()});
            } catch (const DivisorProximity& e) {
                cr.skips.push_back({point_str(n) + " " + spectral_str(P, pidx), e.what()});
            }
        });
    }
    cr.value = max_res;
    cr.pass = cr.exact_mode ? cr.exact_zero : max_res <= tol;
    cr.wall_ms = sw.ms();
    return cr;
}

namespace {

// Normalizes a float operator so its largest window coefficient is 1; the
// exact field passes through unchanged.
template <class S>
DifferenceOperator<S> normalized_for_window(const DifferenceOperator<S>& D,
                                            const LatticeWindow& window) {
    if constexpr (scalar_traits<S>::exact) {
        (void)window;
        return D;
    } else {
        double m = max_coefficient_on_window(D, window);
        if (m == 0.0) return D;
        return D.scaled(Cplx(1.0 / m, 0.0));
    }
}

template <class S>
Mat<S> random_probe_value(std::mt19937_64& rng, int rank) {
    Mat<S> v(rank, 1);
    for (int i = 0; i < rank; ++i) {
        if constexpr (scalar_traits<S>::exact) {
            v(i, 0) = S(static_cast<long>(rng() % 19) - 9);
        } else {
            double re = (static_cast<double>(rng() % 2001) - 1000.0) / 1000.0;
            double im = (static_cast<double>(rng() % 2001) - 1000.0) / 1000.0;
            v(i, 0) = Cplx(re, im);
        }
    }
    return v;
}

} // namespace

template <class S>
CheckResult check_commutator(std::string name, const DifferenceOperator<S>& A,
                             const DifferenceOperator<S>& B, const LatticeWindow& window,
                             int probes, double tol, std::uint64_t seed) {
    Stopwatch sw;
    CheckResult cr;
    cr.name = std::move(name);
    cr.threshold = tol;
    cr.exact_mode = scalar_traits<S>::exact;
    cr.points_total = window.size() * (1 + std::max(0, probes));

    DifferenceOperator<S> An = normalized_for_window(A, window);
    DifferenceOperator<S> Bn = normalized_for_window(B, window);
    DifferenceOperator<S> C = commutator(An, Bn);

    // (i) coefficient level
    ZeroCheck zc = is_zero_on_window(C, window, scalar_traits<S>::exact ? 0.0 : tol);
    cr.exact_zero = zc.is_zero;
    cr.value = zc.max_residual;
    for (const auto& s : zc.skips) cr.skips.push_back(s);
    bool ok = zc.is_zero;

    // (ii) application level: random probe functions on the dilated window
    std::vector<MultiIndex> reach;
    for (const auto& ta : C.terms()) reach.push_back(ta.shift);
    LatticeWindow domain = window.dilated(reach);
    std::mt19937_64 rng(seed);
    const int rank = A.arity().cols;
    for (int pr = 0; pr < probes; ++pr) {
        auto table = std::make_shared<std::map<MultiIndex, Mat<S>>>();
        domain.for_each([&](const MultiIndex& n) { table->emplace(n, random_probe_value<S>(rng, rank)); });
        LatticeFunction<S> phi(window.dim(), Arity{rank, 1},
                               [table](const MultiIndex& n) { return table->at(n); });
        window.for_each([&](const MultiIndex& n) {
            try {
                double r = C.apply_at(phi, n).max_abs();
                cr.value = std::max(cr.value, r);
                if (scalar_traits<S>::exact ? r != 0.0 : r > tol) {
                    ok = false;
                    if (r != 0.0) cr.exact_zero = false;
                }
            } catch (const PoleHit& e) {
                cr.skips.push_back({point_str(n) + " probe#" + std::to_string(pr), e.what()});
            }
        });
    }

    cr.pass = ok;
    cr.wall_ms = sw.ms();
    return cr;
}

template <class S>
CheckResult check_freeness(std::string name, const BasisFamily<S>& family, int k_max, int samples,
                           double svd_tol, std::uint64_t seed, double floor) {
    Stopwatch sw;
    CheckResult cr;
    cr.name = std::move(name);
    cr.threshold = svd_tol;
    cr.higher_is_better = true;
    cr.exact_mode = scalar_traits<S>::exact;
    cr.value = 1.0;
    bool ok = true;

    for (int k = 1; k <= k_max; ++k) {
        // columns (m, j) with |m|_inf < k, i.e. T^m psi_j sampled at n = 0
        std::vector<MultiIndex> ms;
        LatticeWindow::cube(family.vars, 0, k - 1).for_each(
            [&](const MultiIndex& m) { ms.push_back(m); });
        const int cols = static_cast<int>(ms.size()) * family.rank;
        const int rows = std::max(samples, 3 * cols);
        auto pts = family.sample(rows, seed + static_cast<std::uint64_t>(k), floor);
        cr.points_total += rows;

        if constexpr (scalar_traits<S>::exact) {
            Mat<Rat> M(rows, cols);
            for (int r = 0; r < rows; ++r) {
                int c = 0;
                for (const auto& m : ms)
                    for (int j = 0; j < family.rank; ++j)
                        M(r, c++) = family.eval(j, m, pts[static_cast<size_t>(r)]);
            }
            int rank = exact_rank(M);
            if (rank < cols) {
                ok = false;
                cr.value = 0.0;
            }
            cr.exact_zero = ok;
        } else {
            Eigen::MatrixXcd M(rows, cols);
            int skipped_rows = 0;
            for (int r = 0; r < rows; ++r) {
                int c = 0;
                try {
                    for (const auto& m : ms)
                        for (int j = 0; j < family.rank; ++j)
                            M(r, c++) = to_cplx(family.eval(j, m, pts[static_cast<size_t>(r)]));
                } catch (const Error& e) {
                    for (; c < cols; ++c) M(r, c) = Cplx(0.0, 0.0);
                    ++skipped_rows;
                    cr.skips.push_back({"row " + std::to_string(r), e.what()});
                }
            }
            if (rows - skipped_rows < cols) throw SamplingExhausted("too few evaluable sample rows");
            double ratio = singular_value_ratio(M);
            cr.value = std::min(cr.value, ratio);
            if (ratio <= svd_tol) ok = false;
        }
    }
    cr.pass = ok;
    cr.wall_ms = sw.ms();
    return cr;
}

CheckResult check_continuum_limit(std::string name, const AbelianFamilyParams& base, int halvings,
                                  bool normalized, double order_threshold) {
    Stopwatch sw;
    CheckResult cr;
    cr.name = std::move(name);
    cr.threshold = order_threshold;
    cr.higher_is_better = true;
    if (base.sp.genus != 1) throw ArityMismatch("continuum-limit check runs on the genus-1 family");
    if (halvings < 3) throw Error("need at least 3 step sizes for an order fit");

    ThetaCharacteristic ch0 = ThetaCharacteristic::zero(1);
    auto th = [&](Cplx w) {
        Eigen::VectorXcd v(1);
        v << w;
        return theta_eval(v, base.sp, ch0, base.tp);
    };
    // F(z, x) = theta(z + x)/theta(z); the shifted step acts by
    // T_h F = F(z, x + h) theta(z - h)/theta(z).
    const Cplx z0(0.31, 0.27);
    const Cplx x0 = base.x0(0);
    const Cplx tz = th(z0);
    auto F = [&](Cplx x) { return th(z0 + x) / tz; };

    std::vector<Cplx> delta;
    std::vector<double> hs;
    Cplx h = base.h(0);
    for (int k = 0; k < halvings; ++k) {
        Cplx step = (F(x0 + h) * th(z0 - h) / tz - F(x0));
        delta.push_back(normalized ? step / h : step);
        hs.push_back(std::abs(h));
        h /= 2.0;
    }
    cr.points_total = halvings;

    // least-squares slope of log|Delta_k - Delta_{k+1}| against log h_k
    std::vector<double> xs, ys;
    for (size_t k = 0; k + 1 < delta.size(); ++k) {
        double d = std::abs(delta[k] - delta[k + 1]);
        if (d == 0.0) continue;
        xs.push_back(std::log(hs[k]));
        ys.push_back(std::log(d));
    }
    double order = 0.0;
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= xs.size();
        my /= ys.size();
        double num = 0, den = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            num += (xs[i] - mx) * (ys[i] - my);
            den += (xs[i] - mx) * (xs[i] - mx);
        }
        order = den > 0 ? num / den : 0.0;
    }
    cr.value = order;

    // a genuine first-order limit settles on a nonzero value: the last
    // difference must be small against the last iterate
    double last_diff = std::abs(delta[delta.size() - 2] - delta.back());
    double last_mag = std::abs(delta.back());
    bool settles = last_mag > 0.0 && last_diff <= 0.5 * last_mag;
    cr.pass = order >= order_threshold && settles;
    cr.wall_ms = sw.ms();
    return cr;
}

template <class S>
DifferenceOperator<S> corrupt_coefficient(const DifferenceOperator<S>& D, const MultiIndex& shift,
                                          const S& delta) {
    DifferenceOperator<S> out(D.vars(), D.arity());
    bool touched = false;
    for (const auto& t : D.terms()) {
        if (t.shift == shift) {
            Mat<S> bump = Mat<S>::zero(D.arity());
            bump(0, 0) = delta;
            out.add_term(t.shift, t.coeff + LatticeFunction<S>::constant(D.vars(), bump));
            touched = true;
        } else {
            out.add_term(t.shift, t.coeff);
        }
    }
    if (!touched) throw Error("corrupt_coefficient: no term with shift " + shift.str());
    return out;
}

template <class S>
BasisFamily<S> with_duplicated_row(const BasisFamily<S>& family) {
    BasisFamily<S> out = family;
    out.rank = family.rank + 1;
    auto inner = family.eval;
    int orig = family.rank;
    out.eval = [inner, orig](int j, const MultiIndex& n, const SpectralPoint<S>& P) {
        return inner(j >= orig ? 0 : j, n, P);
    };
    return out;
}

// explicit instantiations
template CheckResult check_eigen<Rat>(std::string, const DifferenceOperator<Rat>&,
                                      const BasisFamily<Rat>&, const SpectralFunction<Rat>&,
                                      const LatticeWindow&, const std::vector<SpectralPoint<Rat>>&,
                                      double);
template CheckResult check_eigen<Cplx>(std::string, const DifferenceOperator<Cplx>&,
                                       const BasisFamily<Cplx>&, const SpectralFunction<Cplx>&,
                                       const LatticeWindow&, const std::vector<SpectralPoint<Cplx>>&,
                                       double);
template CheckResult check_commutator<Rat>(std::string, const DifferenceOperator<Rat>&,
                                           const DifferenceOperator<Rat>&, const LatticeWindow&, int,
                                           double, std::uint64_t);
template CheckResult check_commutator<Cplx>(std::string, const DifferenceOperator<Cplx>&,
                                            const DifferenceOperator<Cplx>&, const LatticeWindow&,
                                            int, double, std::uint64_t);
template CheckResult check_freeness<Rat>(std::string, const BasisFamily<Rat>&, int, int, double,
                                         std::uint64_t, double);
template CheckResult check_freeness<Cplx>(std::string, const BasisFamily<Cplx>&, int, int, double,
                                          std::uint64_t, double);
template DifferenceOperator<Rat> corrupt_coefficient<Rat>(const DifferenceOperator<Rat>&,
                                                          const MultiIndex&, const Rat&);
template DifferenceOperator<Cplx> corrupt_coefficient<Cplx>(const DifferenceOperator<Cplx>&,
                                                            const MultiIndex&, const Cplx&);
template BasisFamily<Rat> with_duplicated_row<Rat>(const BasisFamily<Rat>&);
template BasisFamily<Cplx> with_duplicated_row<Cplx>(const BasisFamily<Cplx>&);

} // namespace cdo
