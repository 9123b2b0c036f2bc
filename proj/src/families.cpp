#include "cdo/families.hpp"

#include <random>

namespace cdo {

namespace {

const Cplx I(0.0, 1.0);

Eigen::VectorXcd to_eigen(const SpectralPoint<Cplx>& P) {
    Eigen::VectorXcd z(static_cast<long>(P.size()));
    for (size_t i = 0; i < P.size(); ++i) z(static_cast<long>(i)) = P[i];
    return z;
}

double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

// theta(z - h_j e_j) for one axis.
Eigen::VectorXcd minus_h_axis(const Eigen::VectorXcd& z, const Eigen::VectorXcd& h, int j) {
    Eigen::VectorXcd w = z;
    w(j) -= h(j);
    return w;
}

} // namespace

AbelianFamilyParams AbelianFamilyParams::genus1_default() {
    AbelianFamilyParams p;
    Eigen::MatrixXcd tau(1, 1);
    tau << I;
    p.sp = validate_siegel(tau);
    p.c = Eigen::VectorXcd::Zero(1);
    p.x0 = Eigen::VectorXcd::Constant(1, Cplx(0.05, 0.0));
    p.h = Eigen::VectorXcd::Constant(1, Cplx(0.17, 0.0));
    p.beta = Eigen::VectorXcd::Zero(1);
    return p;
}

AbelianFamilyParams AbelianFamilyParams::genus2_default() {
    AbelianFamilyParams p;
    Eigen::MatrixXcd tau(2, 2);
    tau << 2.0 * I, Cplx(0.5, 0.0), Cplx(0.5, 0.0), 3.0 * I;
    p.sp = validate_siegel(tau);
    p.c = Eigen::VectorXcd::Zero(2);
    p.x0 = Eigen::VectorXcd(2);
    p.x0 << Cplx(0.05, 0.0), Cplx(0.03, 0.0);
    p.h = Eigen::VectorXcd(2);
    p.h << Cplx(0.2, 0.0), Cplx(0.3, 0.0);
    p.beta = Eigen::VectorXcd(2);
    p.beta << Cplx(0.11, 0.0), Cplx(0.07, 0.13);
    return p;
}

void validate_abelian_params(const AbelianFamilyParams& p) {
    const int g = p.sp.genus;
    if (p.c.size() != g || p.x0.size() != g || p.h.size() != g)
        throw ArityMismatch("abelian family parameter dimensions do not match the genus");
    for (int i = 0; i < g; ++i)
        if (p.h(i) == Cplx(0.0, 0.0)) throw Error("step size h_" + std::to_string(i + 1) + " is zero");
    if (g >= 2 && p.beta.size() != g)
        throw ArityMismatch("translation beta dimension does not match the genus");
}

namespace {

// Common evaluation core: theta(z) and the per-axis ratios
// (theta(z - h_j e_j)/theta(z))^{n_j}; the axis factor is a denominator for
// negative n_j, so it gets the same divisor floor.
struct AbelianCore {
    AbelianFamilyParams p;

    Cplx theta_at(const Eigen::VectorXcd& w) const {
        return theta_eval(w, p.sp, ThetaCharacteristic::zero(p.sp.genus), p.tp);
    }
    Cplx denominator_at(const Eigen::VectorXcd& w) const {
        return theta0_denominator(w, p.sp, p.tp, p.divisor_floor);
    }

    Cplx ratio_product(const Eigen::VectorXcd& z, Cplx theta_z, const MultiIndex& n) const {
        Cplx prod(1.0, 0.0);
        for (int j = 0; j < p.sp.genus; ++j) {
            if (n[j] == 0) continue;
            Cplx num = n[j] > 0 ? theta_at(minus_h_axis(z, p.h, j))
                                : denominator_at(minus_h_axis(z, p.h, j));
            prod *= cpow_int(num / theta_z, n[j]);
        }
        return prod;
    }

    Eigen::VectorXcd nh(const MultiIndex& n) const {
        Eigen::VectorXcd v(p.sp.genus);
        for (int j = 0; j < p.sp.genus; ++j) v(j) = static_cast<double>(n[j]) * p.h(j);
        return v;
    }
};

std::vector<SpectralPoint<Cplx>> sample_abelian(const AbelianFamilyParams& p, int count,
                                                std::uint64_t seed, double floor) {
    const int g = p.sp.genus;
    std::mt19937_64 rng(seed);
    std::vector<SpectralPoint<Cplx>> out;
    long attempts = 0, cap = 500L * count + 500;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > cap)
            throw SamplingExhausted("rejection sampling exhausted after " + std::to_string(cap) +
                                    " attempts (floor too aggressive)");
        Eigen::VectorXd u(g), v(g);
        for (int i = 0; i < g; ++i) u(i) = u01(rng);
        for (int i = 0; i < g; ++i) v(i) = u01(rng);
        Eigen::VectorXcd z = u.cast<Cplx>() + p.sp.tau * v.cast<Cplx>();

        bool ok = true;
        auto clears_floor = [&](const Eigen::VectorXcd& w) {
            ThetaValue tv = theta_eval_full(w, p.sp, ThetaCharacteristic::zero(g), p.tp);
            return std::abs(tv.value) >= floor * tv.max_term;
        };
        if (!clears_floor(z)) ok = false;
        for (int j = 0; ok && j < g; ++j)
            if (!clears_floor(minus_h_axis(z, p.h, j))) ok = false;
        if (!ok) continue;

        SpectralPoint<Cplx> pt(static_cast<size_t>(g));
        for (int i = 0; i < g; ++i) pt[static_cast<size_t>(i)] = z(i);
        out.push_back(std::move(pt));
    }
    return out;
}

} // namespace

BasisFamily<Cplx> make_genus1_basis(const AbelianFamilyParams& p) {
    if (p.sp.genus != 1) throw ArityMismatch("genus-1 family needs a 1x1 period matrix");
    validate_abelian_params(p);
    AbelianCore core{p};
    BasisFamily<Cplx> fam;
    fam.tag = FamilyTag::Genus1;
    fam.rank = 1;
    fam.vars = 1;
    fam.eval = [core](int j, const MultiIndex& n, const SpectralPoint<Cplx>& P) {
        if (j != 0) throw Error("genus-1 family has a single basis element");
        Eigen::VectorXcd z = to_eigen(P);
        Cplx tz = core.denominator_at(z);
        Cplx num = core.theta_at(z + core.p.c + core.p.x0 + core.nh(n));
        return num / tz * core.ratio_product(z, tz, n);
    };
    fam.sample = [p](int count, std::uint64_t seed, double floor) {
        return sample_abelian(p, count, seed, floor);
    };
    return fam;
}

BasisFamily<Cplx> make_genus2_basis(const AbelianFamilyParams& p) {
    if (p.sp.genus != 2) throw ArityMismatch("genus-2 family needs a 2x2 period matrix");
    validate_abelian_params(p);
    AbelianCore core{p};
    BasisFamily<Cplx> fam;
    fam.tag = FamilyTag::Genus2Abelian;
    fam.rank = 2;
    fam.vars = 2;
    fam.eval = [core](int j, const MultiIndex& n, const SpectralPoint<Cplx>& P) {
        Eigen::VectorXcd z = to_eigen(P);
        Cplx tz = core.denominator_at(z);
        Cplx ratios = core.ratio_product(z, tz, n);
        Eigen::VectorXcd arg = z + core.p.c + core.p.x0 + core.nh(n);
        if (j == 0) return core.theta_at(arg) / tz * ratios;
        if (j != 1) throw Error("genus-2 family has two basis elements");
        Cplx num = core.theta_at(arg + core.p.beta) * core.theta_at(z - core.p.beta);
        return num / (tz * tz) * ratios;
    };
    fam.sample = [p](int count, std::uint64_t seed, double floor) {
        return sample_abelian(p, count, seed, floor);
    };
    return fam;
}

SpectralFunction<Cplx> genus1_eigenvalue(const AbelianFamilyParams& p, EigenvalueChoice which) {
    if (p.sp.genus != 1) throw ArityMismatch("genus-1 eigenvalue needs genus 1");
    validate_abelian_params(p);
    AbelianCore core{p};
    SpectralFunction<Cplx> f;
    f.is_pole = [core](const SpectralPoint<Cplx>& P) {
        ThetaValue tv = theta_eval_full(to_eigen(P), core.p.sp, ThetaCharacteristic::zero(1), core.p.tp);
        return std::abs(tv.value) < core.p.divisor_floor * tv.max_term;
    };
    if (which == EigenvalueChoice::Lambda) {
        f.eval = [core](const SpectralPoint<Cplx>& P) {
            Eigen::VectorXcd z = to_eigen(P);
            Cplx tz = core.denominator_at(z);
            return core.theta_at(z - core.p.h) * core.theta_at(z + core.p.h) / (tz * tz);
        };
    } else {
        f.eval = [core](const SpectralPoint<Cplx>& P) {
            Eigen::VectorXcd z = to_eigen(P);
            Cplx tz = core.denominator_at(z);
            Cplx th = core.theta_at(z + core.p.h / 2.0);
            return core.theta_at(z - core.p.h) * th * th / (tz * tz * tz);
        };
    }
    return f;
}

SpectralFunction<Cplx> genus2_eigenvalue(const AbelianFamilyParams& p, int axis) {
    if (p.sp.genus != 2) throw ArityMismatch("genus-2 eigenvalue needs genus 2");
    if (axis < 0 || axis > 1) throw Error("axis must be 0 or 1");
    validate_abelian_params(p);
    AbelianCore core{p};
    SpectralFunction<Cplx> f;
    f.is_pole = [core](const SpectralPoint<Cplx>& P) {
        ThetaValue tv = theta_eval_full(to_eigen(P), core.p.sp, ThetaCharacteristic::zero(2), core.p.tp);
        return std::abs(tv.value) < core.p.divisor_floor * tv.max_term;
    };
    f.eval = [core, axis](const SpectralPoint<Cplx>& P) {
        Eigen::VectorXcd z = to_eigen(P);
        Cplx tz = core.denominator_at(z);
        Eigen::VectorXcd lo = minus_h_axis(z, core.p.h, axis);
        Eigen::VectorXcd hi = z;
        hi(axis) += core.p.h(axis);
        return core.theta_at(lo) * core.theta_at(hi) / (tz * tz);
    };
    return f;
}

} // namespace cdo
