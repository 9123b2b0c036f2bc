#include "cdo/builders.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace cdo {

namespace {

// Division guard for coefficient formulas: a vanishing theta denominator
// means the chosen parameters sit on a divisor.
Cplx guarded_div(const Cplx& num, const Cplx& den, const char* what) {
    if (std::abs(den) < 1e-200) throw DivisorProximity(std::string(what) + " denominator vanished");
    return num / den;
}

struct ThetaCtx {
    SiegelPoint sp;
    TruncationPolicy tp;
    Cplx operator()(const Eigen::VectorXcd& w) const {
        return theta_eval(w, sp, ThetaCharacteristic::zero(sp.genus), tp);
    }
};

} // namespace

// ---------------------------------------------------------------------------
// Genus 1
// ---------------------------------------------------------------------------

Genus1Pair build_genus1_pair(const AbelianFamilyParams& p) {
    if (p.sp.genus != 1) throw ArityMismatch("genus-1 builder needs genus 1");
    validate_abelian_params(p);

    ThetaCtx th{p.sp, p.tp};
    const Cplx h = p.h(0);
    const Cplx X = p.c(0) + p.x0(0); // only the combination c + x enters
    SpecialPointsG1 pts;
    pts.q = (Cplx(1.0, 0.0) + p.sp.tau(0, 0)) / 2.0;
    pts.p = pts.q + h;
    pts.r = pts.q - h / 2.0;

    auto sc = [](Cplx v) {
        Eigen::VectorXcd w(1);
        w << v;
        return w;
    };

    // n-independent theta values at the special points
    const Cplx th_p = th(sc(pts.p)), th_p_plus_h = th(sc(pts.p + h)), th_p_half = th(sc(pts.p + h / 2.0));
    const Cplx th_q_plus_h = th(sc(pts.q + h)), th_q_minus_h = th(sc(pts.q - h)),
               th_q_half = th(sc(pts.q + h / 2.0));
    const Cplx th_r = th(sc(pts.r)), th_r_minus_h = th(sc(pts.r - h));

    auto at = [th, X, h, sc](Cplx base, long steps) {
        return [th, X, h, sc, base, steps](const MultiIndex& n) {
            return th(sc(base + X + (static_cast<double>(n[0] + steps)) * h));
        };
    };

    auto v1 = [=](const MultiIndex& n) {
        return guarded_div(at(pts.p, 0)(n) * th_p_plus_h, at(pts.p, 1)(n) * th_p, "v1");
    };
    auto v2 = [=](const MultiIndex& n) {
        return guarded_div(at(pts.q, 0)(n) * th_q_plus_h, at(pts.q, 2)(n) * th_q_minus_h, "v2");
    };
    auto u1 = [=](const MultiIndex& n) {
        return guarded_div(at(pts.p, 0)(n) * th_p_half * th_p_half, at(pts.p, 1)(n) * th_p * th_p, "u1");
    };
    auto u3 = [=](const MultiIndex& n) {
        return guarded_div(at(pts.q, 0)(n) * th_q_half * th_q_half,
                           at(pts.q, 3)(n) * th_q_minus_h * th_q_minus_h, "u3");
    };
    auto u2 = [=](const MultiIndex& n) {
        Cplx mid = at(pts.r, 2)(n);
        Cplx first = guarded_div(u1(n) * at(pts.r, 1)(n) * th_r, mid * th_r_minus_h, "u2");
        Cplx second = guarded_div(u3(n) * at(pts.r, 3)(n) * th_r_minus_h, mid * th_r, "u2");
        return -first - second;
    };

    Genus1Pair out;
    out.points = pts;
    out.L1 = DifferenceOperator<Cplx>(1, Arity{1, 1});
    out.L1.add_term(MultiIndex(std::vector<int>{2}), LatticeFunction<Cplx>::scalar(1, v2, {}, "v2"));
    out.L1.add_term(MultiIndex(std::vector<int>{1}), LatticeFunction<Cplx>::scalar(1, v1, {}, "v1"));
    out.L2 = DifferenceOperator<Cplx>(1, Arity{1, 1});
    out.L2.add_term(MultiIndex(std::vector<int>{3}), LatticeFunction<Cplx>::scalar(1, u3, {}, "u3"));
    out.L2.add_term(MultiIndex(std::vector<int>{2}), LatticeFunction<Cplx>::scalar(1, u2, {}, "u2"));
    out.L2.add_term(MultiIndex(std::vector<int>{1}), LatticeFunction<Cplx>::scalar(1, u1, {}, "u1"));
    return out;
}

// ---------------------------------------------------------------------------
// Newton search for divisor intersections
// ---------------------------------------------------------------------------

namespace {

struct LatticeReducer {
    Eigen::MatrixXcd tau;
    Eigen::MatrixXd Yinv;

    explicit LatticeReducer(const SiegelPoint& sp)
        : tau(sp.tau), Yinv(Eigen::MatrixXd(sp.tau.imag()).inverse()) {}

    // z = u + tau v with real u, v; wraps both into [0, 1).
    Eigen::VectorXcd reduce(const Eigen::VectorXcd& z) const {
        Eigen::VectorXd v = Yinv * z.imag();
        Eigen::VectorXd vf = v.array() - v.array().floor();
        Eigen::VectorXd u = (z - tau * v.cast<Cplx>()).real();
        Eigen::VectorXd uf = u.array() - u.array().floor();
        return uf.cast<Cplx>() + tau * vf.cast<Cplx>();
    }

    double lattice_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const {
        Eigen::VectorXcd d = a - b;
        Eigen::VectorXd q = (Yinv * d.imag()).array().round();
        Eigen::VectorXd m = (d - tau * q.cast<Cplx>()).real().array().round();
        Eigen::VectorXcd r = d - m.cast<Cplx>() - tau * q.cast<Cplx>();
        return r.norm();
    }
};

bool lex_less(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    for (long i = 0; i < a.size(); ++i) {
        if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
        if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
    }
    return false;
}

} // namespace

std::vector<Eigen::VectorXcd> find_divisor_intersection(const std::vector<Eigen::VectorXcd>& shifts,
                                                        const SiegelPoint& sp,
                                                        const TruncationPolicy& tp,
                                                        const NewtonGrid& grid) {
    const int g = sp.genus;
    if (static_cast<int>(shifts.size()) != g)
        throw ArityMismatch("need as many divisor conditions as the genus");
    for (const auto& s : shifts)
        if (s.size() != g) throw ArityMismatch("divisor shift dimension mismatch");

    ThetaCtx th{sp, tp};
    auto F = [&](const Eigen::VectorXcd& z) {
        Eigen::VectorXcd f(g);
        for (int i = 0; i < g; ++i) f(i) = th(z - shifts[static_cast<size_t>(i)]);
        return f;
    };
    auto fnorm = [](const Eigen::VectorXcd& f) { return f.cwiseAbs().maxCoeff(); };

    // seed grid z = u + tau v over the fundamental cell
    std::vector<std::pair<double, Eigen::VectorXcd>> seeds;
    const int G = grid.per_axis;
    std::vector<int> idx(static_cast<size_t>(2 * g), 0);
    while (true) {
        Eigen::VectorXd u(g), v(g);
        for (int i = 0; i < g; ++i) {
            u(i) = (idx[static_cast<size_t>(i)] + 0.5) / G;
            v(i) = (idx[static_cast<size_t>(g + i)] + 0.5) / G;
        }
        Eigen::VectorXcd z = u.cast<Cplx>() + sp.tau * v.cast<Cplx>();
        seeds.emplace_back(fnorm(F(z)), z);
        int axis = 2 * g - 1;
        while (axis >= 0) {
            if (++idx[static_cast<size_t>(axis)] < G) break;
            idx[static_cast<size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
    std::stable_sort(seeds.begin(), seeds.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    const double dstep = 1e-6;
    LatticeReducer reducer(sp);
    std::vector<Eigen::VectorXcd> roots;
    const int tries = std::min<int>(grid.keep_best, static_cast<int>(seeds.size()));
    for (int s = 0; s < tries; ++s) {
        Eigen::VectorXcd z = seeds[static_cast<size_t>(s)].second;
        bool converged = false;
        Eigen::VectorXcd f = F(z);
        for (int it = 0; it < grid.max_iter; ++it) {
            if (fnorm(f) < grid.tol) {
                converged = true;
                break;
            }
            Eigen::MatrixXcd J(g, g);
            for (int j = 0; j < g; ++j) {
                Eigen::VectorXcd zp = z, zm = z;
                zp(j) += dstep;
                zm(j) -= dstep;
                J.col(j) = (F(zp) - F(zm)) / (2.0 * dstep);
            }
            Eigen::VectorXcd delta = J.partialPivLu().solve(-f);
            if (!delta.allFinite()) break;
            // halve the step while the residual grows
            double alpha = 1.0;
            Eigen::VectorXcd znew;
            Eigen::VectorXcd fnew;
            int halvings = 0;
            while (true) {
                znew = z + alpha * delta;
                fnew = F(znew);
                if (fnorm(fnew) <= fnorm(f) || halvings >= 8) break;
                alpha /= 2.0;
                ++halvings;
            }
            z = znew;
            f = fnew;
        }
        if (converged || fnorm(F(z)) < grid.tol) roots.push_back(reducer.reduce(z));
    }
    if (roots.empty()) throw NewtonDivergence("no seed converged to a divisor intersection");

    std::sort(roots.begin(), roots.end(), lex_less);
    std::vector<Eigen::VectorXcd> distinct;
    for (const auto& r : roots) {
        bool dup = false;
        for (const auto& d : distinct)
            if (reducer.lattice_distance(r, d) < grid.dedup_tol) dup = true;
        if (!dup) distinct.push_back(r);
    }
    return distinct;
}

DivisorIntersections find_genus2_special_points(const AbelianFamilyParams& p,
                                                const NewtonGrid& grid) {
    if (p.sp.genus != 2) throw ArityMismatch("special points are a genus-2 construction");
    validate_abelian_params(p);

    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(2);
    Eigen::VectorXcd h1 = zero, h2 = zero;
    h1(0) = p.h(0);
    h2(1) = p.h(1);

    auto pair_of = [&](const Eigen::VectorXcd& s1, const Eigen::VectorXcd& s2) {
        auto roots = find_divisor_intersection({s1, s2}, p.sp, p.tp, grid);
        if (roots.size() < 2)
            throw TooFewIntersections("expected 2 intersection points, found " +
                                      std::to_string(roots.size()));
        if (roots.size() > 2)
            throw Error("expected 2 intersection points, found " + std::to_string(roots.size()) +
                        " (deduplication failure or non-generic parameters)");
        return std::array<Eigen::VectorXcd, 2>{roots[0], roots[1]};
    };

    DivisorIntersections out;
    out.h1_h2 = pair_of(h1, h2);
    out.h1_zero = pair_of(h1, zero);
    out.h2_zero = pair_of(h2, zero);
    out.zero_beta = pair_of(zero, p.beta);
    out.h1_beta = pair_of(h1, p.beta);
    out.h2_beta = pair_of(h2, p.beta);
    return out;
}

// ---------------------------------------------------------------------------
// Genus-2 special-point operator
// ---------------------------------------------------------------------------

namespace {

// Solves the 2x2 system [a1 b1; a2 b2] x = [r1; r2] directly.
std::array<Cplx, 2> solve2(Cplx a1, Cplx b1, Cplx r1, Cplx a2, Cplx b2, Cplx r2, const char* what) {
    Cplx det = a1 * b2 - b1 * a2;
    double scale = std::max({std::abs(a1) * std::abs(b2), std::abs(b1) * std::abs(a2), 1e-300});
    if (std::abs(det) < 1e-10 * scale)
        throw SingularSolve(std::string(what) + " system is numerically singular");
    return {(r1 * b2 - b1 * r2) / det, (a1 * r2 - r1 * a2) / det};
}

struct G2Coeffs {
    // row 1
    Cplx v_ea, u_ea;          // T^{e_a} entries (0,0) and (0,1)
    Cplx v_2ea, v_ea_eb;      // T^{2 e_a}, T^{e_a + e_b} entries (0,0)
    // row 2
    Cplx w_ea, s_ea;          // T^{e_a} entries (1,0), (1,1)
    Cplx w_ea_eb, s_ea_eb;    // T^{e_a+e_b}
    Cplx w_ea_2eb;            // T^{e_a+2e_b} entry (1,0)
    Cplx w_2ea, s_2ea;        // T^{2e_a}
    Cplx w_2ea_eb, w_3ea;     // T^{2e_a+e_b}, T^{3e_a} entry (1,0)
};

struct G2Engine {
    AbelianFamilyParams prm;
    int a, b; // axis and the other axis
    Eigen::VectorXcd ha, hb;  // h_a e_a, h_b e_b as vectors
    Eigen::VectorXcd X;       // c + x0
    std::array<Eigen::VectorXcd, 2> P, Q, R; // p, q (Theta_a ^ Theta), r (Theta ^ Theta_beta)
    Eigen::VectorXcd T, U, QP;               // one point each of the remaining pairs
    ThetaCtx th;

    // n-independent values
    std::array<Cplx, 2> th_p, th_p_mbeta, th_p_pha;
    std::array<Cplx, 2> th_q_b, th_q_mbeta, th_q_pha;
    std::array<Cplx, 2> th_r_a, th_r_b, th_r_pha;
    Cplx th_t, th_t_b, th_u, th_u_a, th_qp_a, th_qp_mbeta, th_qp_pha;

    mutable std::mutex mu;
    mutable std::map<MultiIndex, G2Coeffs> cache;

    Eigen::VectorXcd nh(const MultiIndex& n) const {
        Eigen::VectorXcd v(2);
        for (int j = 0; j < 2; ++j) v(j) = static_cast<double>(n[j]) * prm.h(j);
        return v;
    }

    const G2Coeffs& coeffs(const MultiIndex& n) const {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;

        G2Coeffs c;
        Eigen::VectorXcd N = X + nh(n);
        auto at = [&](const Eigen::VectorXcd& base, const Eigen::VectorXcd& extra) {
            return th(base + N + extra);
        };
        Eigen::VectorXcd z0 = Eigen::VectorXcd::Zero(2);

        // Row 1. Substituting the p-points kills everything except the
        // T^{e_a} column pair; the r-points then give the top-degree pair.
        {
            auto row = [&](int i) {
                return std::array<Cplx, 3>{at(P[i], ha) * th_p[i],
                                           at(P[i], ha + prm.beta) * th_p_mbeta[i],
                                           at(P[i], z0) * th_p_pha[i]};
            };
            auto r0 = row(0), r1 = row(1);
            auto sol = solve2(r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], "A1");
            c.v_ea = sol[0];
            c.u_ea = sol[1];
        }
        {
            auto row = [&](int i) {
                return std::array<Cplx, 3>{at(R[i], 2.0 * ha) * th_r_a[i],
                                           at(R[i], ha + hb) * th_r_b[i],
                                           at(R[i], z0) * th_r_pha[i]};
            };
            auto r0 = row(0), r1 = row(1);
            auto sol = solve2(r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], "A2");
            c.v_2ea = sol[0];
            c.v_ea_eb = sol[1];
        }

        // Row 2: same restriction cascade applied to the identity with the
        // rank-2 right-hand side R(z) = theta(z+h_a e_a) theta(z+X+nh+beta) theta(z-beta).
        {
            auto row = [&](int i) {
                Cplx rhs = th_p_pha[i] * at(P[i], prm.beta) * th_p_mbeta[i];
                return std::array<Cplx, 3>{at(P[i], ha) * th_p[i] * th_p[i],
                                           at(P[i], ha + prm.beta) * th_p_mbeta[i] * th_p[i], rhs};
            };
            auto r0 = row(0), r1 = row(1);
            auto sol = solve2(r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], "B1");
            c.w_ea = sol[0];
            c.s_ea = sol[1];
        }
        {
            auto row = [&](int i) {
                Cplx rhs = th_q_pha[i] * at(Q[i], prm.beta) * th_q_mbeta[i];
                return std::array<Cplx, 3>{at(Q[i], ha + 2.0 * hb) * th_q_b[i] * th_q_b[i],
                                           at(Q[i], ha + hb + prm.beta) * th_q_mbeta[i] * th_q_b[i],
                                           rhs};
            };
            auto r0 = row(0), r1 = row(1);
            auto sol = solve2(r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], "B2");
            c.w_ea_2eb = sol[0];
            c.s_ea_eb = sol[1];
        }
        {
            auto row = [&](int i) {
                Cplx rhs = -c.w_ea_2eb * at(R[i], ha + 2.0 * hb) * th_r_b[i] * th_r_b[i];
                return std::array<Cplx, 3>{at(R[i], 2.0 * ha + hb) * th_r_a[i] * th_r_b[i],
                                           at(R[i], 3.0 * ha) * th_r_a[i] * th_r_a[i], rhs};
            };
            auto r0 = row(0), r1 = row(1);
            auto sol = solve2(r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], "B3");
            c.w_2ea_eb = sol[0];
            c.w_3ea = sol[1];
        }
        c.w_ea_eb = guarded_div(-(c.w_ea * at(T, ha) * th_t * th_t +
                                  c.w_ea_2eb * at(T, ha + 2.0 * hb) * th_t_b * th_t_b),
                                at(T, ha + hb) * th_t_b * th_t, "row-2 t-point");
        c.w_2ea = guarded_div(-(c.w_ea * at(U, ha) * th_u * th_u +
                                c.w_3ea * at(U, 3.0 * ha) * th_u_a * th_u_a),
                              at(U, 2.0 * ha) * th_u_a * th_u, "row-2 u-point");
        Cplx rhs_qp = th_qp_pha * at(QP, prm.beta) * th_qp_mbeta;
        c.s_2ea = guarded_div(rhs_qp - c.w_3ea * at(QP, 3.0 * ha) * th_qp_a * th_qp_a,
                              at(QP, 2.0 * ha + prm.beta) * th_qp_mbeta * th_qp_a, "row-2 point");

        return cache.emplace(n, c).first->second;
    }
};

} // namespace

DifferenceOperator<Cplx> build_genus2_special(const AbelianFamilyParams& p,
                                              const DivisorIntersections& pts, int axis) {
    if (p.sp.genus != 2) throw ArityMismatch("genus-2 builder needs genus 2");
    if (axis < 0 || axis > 1) throw Error("axis must be 0 or 1");
    validate_abelian_params(p);

    auto eng = std::make_shared<G2Engine>();
    eng->prm = p;
    eng->a = axis;
    eng->b = 1 - axis;
    eng->th = ThetaCtx{p.sp, p.tp};
    eng->ha = Eigen::VectorXcd::Zero(2);
    eng->hb = Eigen::VectorXcd::Zero(2);
    eng->ha(eng->a) = p.h(eng->a);
    eng->hb(eng->b) = p.h(eng->b);
    eng->X = p.c + p.x0;
    eng->P = pts.h1_h2;
    eng->Q = axis == 0 ? pts.h1_zero : pts.h2_zero;
    eng->R = pts.zero_beta;
    eng->T = (axis == 0 ? pts.h1_beta : pts.h2_beta)[0];
    eng->U = (axis == 0 ? pts.h2_beta : pts.h1_beta)[0];
    eng->QP = (axis == 0 ? pts.h2_zero : pts.h1_zero)[0];

    const auto& th = eng->th;
    for (int i = 0; i < 2; ++i) {
        eng->th_p[i] = th(eng->P[i]);
        eng->th_p_mbeta[i] = th(eng->P[i] - p.beta);
        eng->th_p_pha[i] = th(eng->P[i] + eng->ha);
        eng->th_q_b[i] = th(eng->Q[i] - eng->hb);
        eng->th_q_mbeta[i] = th(eng->Q[i] - p.beta);
        eng->th_q_pha[i] = th(eng->Q[i] + eng->ha);
        eng->th_r_a[i] = th(eng->R[i] - eng->ha);
        eng->th_r_b[i] = th(eng->R[i] - eng->hb);
        eng->th_r_pha[i] = th(eng->R[i] + eng->ha);
    }
    eng->th_t = th(eng->T);
    eng->th_t_b = th(eng->T - eng->hb);
    eng->th_u = th(eng->U);
    eng->th_u_a = th(eng->U - eng->ha);
    eng->th_qp_a = th(eng->QP - eng->ha);
    eng->th_qp_mbeta = th(eng->QP - p.beta);
    eng->th_qp_pha = th(eng->QP + eng->ha);

    auto coeff = [eng](std::function<void(const G2Coeffs&, Mat<Cplx>&)> fill) {
        return LatticeFunction<Cplx>(2, Arity{2, 2}, [eng, fill](const MultiIndex& n) {
            Mat<Cplx> m(2, 2);
            fill(eng->coeffs(n), m);
            return m;
        });
    };

    const MultiIndex ea = MultiIndex::unit(2, eng->a);
    const MultiIndex eb = MultiIndex::unit(2, eng->b);

    DifferenceOperator<Cplx> D(2, Arity{2, 2});
    D.add_term(ea, coeff([](const G2Coeffs& c, Mat<Cplx>& m) {
                   m(0, 0) = c.v_ea;
                   m(0, 1) = c.u_ea;
                   m(1, 0) = c.w_ea;
                   m(1, 1) = c.s_ea;
               }));
    D.add_term(ea + eb, coeff([](const G2Coeffs& c, Mat<Cplx>& m) {
                   m(0, 0) = c.v_ea_eb;
                   m(1, 0) = c.w_ea_eb;
                   m(1, 1) = c.s_ea_eb;
               }));
    D.add_term(ea + ea, coeff([](const G2Coeffs& c, Mat<Cplx>& m) {
                   m(0, 0) = c.v_2ea;
                   m(1, 0) = c.w_2ea;
                   m(1, 1) = c.s_2ea;
               }));
    D.add_term(ea + eb + eb,
               coeff([](const G2Coeffs& c, Mat<Cplx>& m) { m(1, 0) = c.w_ea_2eb; }));
    D.add_term(ea + ea + eb,
               coeff([](const G2Coeffs& c, Mat<Cplx>& m) { m(1, 0) = c.w_2ea_eb; }));
    D.add_term(ea + ea + ea, coeff([](const G2Coeffs& c, Mat<Cplx>& m) { m(1, 0) = c.w_3ea; }));
    return D;
}

} // namespace cdo
