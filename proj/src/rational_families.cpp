#include "cdo/families.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <random>

namespace cdo {

namespace {

long rand_int(std::mt19937_64& rng, long lo, long hi) {
    return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
}

template <class S>
S random_scalar(std::mt19937_64& rng) {
    if constexpr (scalar_traits<S>::exact) {
        return S(rand_int(rng, -9, 9), rand_int(rng, 1, 6));
    } else {
        double re = static_cast<double>(rand_int(rng, -900, 900)) / 100.0;
        double im = static_cast<double>(rand_int(rng, -900, 900)) / 100.0;
        return Cplx(re, im);
    }
}

template <class S>
bool near_zero(const S& v, double scale) {
    if constexpr (scalar_traits<S>::exact)
        return scalar_traits<S>::is_zero(v);
    else
        return scalar_traits<S>::abs(v) <= 1e-12 * std::max(1.0, scale);
}

} // namespace

// ---------------------------------------------------------------------------
// Degenerate family: sigma(z) = z1^3/3 - z2, h = (1,1), x = 0, beta = (1,1/3)
// ---------------------------------------------------------------------------

namespace {

struct SchurCore {
    Rat beta1{1}, beta2{1, 3};

    Rat sigma(const Rat& z1, const Rat& z2) const { return sigma_schur_eval<Rat>(z1, z2); }

    Rat sigma_shift(const SpectralPoint<Rat>& z, long d1, const Rat& d2) const {
        return sigma(z[0] + Rat(d1), z[1] + d2);
    }

    // (sigma(z-e1)/sigma(z))^{n1} (sigma(z-e2)/sigma(z))^{n2}
    Rat ratio_product(const SpectralPoint<Rat>& z, const Rat& s0, const MultiIndex& n) const {
        Rat prod(1);
        for (int j = 0; j < 2; ++j) {
            if (n[j] == 0) continue;
            Rat num = j == 0 ? sigma_shift(z, -1, Rat(0)) : sigma_shift(z, 0, Rat(-1));
            if (n[j] < 0 && num.is_zero())
                throw PoleHit("sigma(z - e_" + std::to_string(j + 1) + ") vanishes with negative shift power");
            prod = prod * Rat::pow(num / s0, n[j]);
        }
        return prod;
    }

    Rat denom(const SpectralPoint<Rat>& z) const {
        Rat s0 = sigma(z[0], z[1]);
        if (s0.is_zero()) throw PoleHit("spectral point on the degenerate divisor");
        return s0;
    }
};

} // namespace

BasisFamily<Rat> make_schur_basis() {
    SchurCore core;
    BasisFamily<Rat> fam;
    fam.tag = FamilyTag::SchurDegenerate;
    fam.rank = 2;
    fam.vars = 2;
    fam.eval = [core](int j, const MultiIndex& n, const SpectralPoint<Rat>& z) {
        if (z.size() != 2) throw ArityMismatch("degenerate family point must be (z1, z2)");
        Rat s0 = core.denom(z);
        Rat ratios = core.ratio_product(z, s0, n);
        if (j == 0) return core.sigma(z[0] + Rat(n[0]), z[1] + Rat(n[1])) / s0 * ratios;
        if (j != 1) throw Error("degenerate family has two basis elements");
        Rat num = core.sigma(z[0] + Rat(n[0]) + core.beta1, z[1] + Rat(n[1]) + core.beta2) *
                  core.sigma(z[0] - core.beta1, z[1] - core.beta2);
        return num / (s0 * s0) * ratios;
    };
    fam.sample = [core](int count, std::uint64_t seed, double floor) {
        std::mt19937_64 rng(seed);
        std::vector<SpectralPoint<Rat>> out;
        long attempts = 0, cap = 500L * count + 500;
        while (static_cast<int>(out.size()) < count) {
            if (++attempts > cap) throw SamplingExhausted("degenerate-family sampling exhausted");
            SpectralPoint<Rat> z{Rat(rand_int(rng, -12, 12), rand_int(rng, 1, 6)),
                                 Rat(rand_int(rng, -12, 12), rand_int(rng, 1, 6))};
            bool ok = std::fabs(core.sigma(z[0], z[1]).to_double()) >= floor &&
                      std::fabs(core.sigma_shift(z, -1, Rat(0)).to_double()) >= floor &&
                      std::fabs(core.sigma_shift(z, 0, Rat(-1)).to_double()) >= floor;
            if (ok) out.push_back(std::move(z));
        }
        return out;
    };
    return fam;
}

SpectralFunction<Rat> schur_eigenvalue(EigenvalueChoice which) {
    SchurCore core;
    SpectralFunction<Rat> f;
    f.is_pole = [core](const SpectralPoint<Rat>& z) { return core.sigma(z[0], z[1]).is_zero(); };
    f.eval = [core, which](const SpectralPoint<Rat>& z) {
        Rat s0 = core.denom(z);
        Rat lo, hi;
        if (which == EigenvalueChoice::Lambda) {
            lo = core.sigma_shift(z, -1, Rat(0));
            hi = core.sigma_shift(z, 1, Rat(0));
        } else {
            lo = core.sigma_shift(z, 0, Rat(-1));
            hi = core.sigma_shift(z, 0, Rat(1));
        }
        return lo * hi / (s0 * s0);
    };
    return f;
}

// ---------------------------------------------------------------------------
// Omega family
// ---------------------------------------------------------------------------

namespace {

template <class S>
S bilinear(const std::array<S, 4>& c, const S& z1, const S& z2, const S& w1, const S& w2) {
    return c[0] * z1 * w1 + c[1] * z1 * w2 + c[2] * z2 * w1 + c[3] * z2 * w2;
}

template <class S>
S bilinear_at(const std::array<S, 4>& c, const SpectralPoint<S>& P) {
    return bilinear(c, P[0], P[1], P[2], P[3]);
}

} // namespace

OmegaParams omega_default() {
    OmegaParams p;
    p.gcoef = {Rat(1), Rat(1), Rat(0), Rat(1)};
    p.g1coef = {Rat(4), Rat(2), Rat(0), Rat(1)};
    p.g2coef = {Rat(1), Rat(-1), Rat(0), Rat(1)};
    p.B = Rat(1);
    p.c1 = Rat(2);
    p.c2 = Rat(-1);
    p.Lambda = Rat(1);
    return p;
}

template <class S>
void validate_omega_params(const OmegaParamsT<S>& p, std::uint64_t seed) {
    if (scalar_traits<S>::is_zero(p.gcoef[3])) throw Error("omega params: g(0,1,0,1) == 0");
    if (scalar_traits<S>::is_zero(p.B) || scalar_traits<S>::is_zero(p.c1) ||
        scalar_traits<S>::is_zero(p.c2) || scalar_traits<S>::is_zero(p.Lambda))
        throw Error("omega params: B, c_i, Lambda must be nonzero");

    std::mt19937_64 rng(seed);
    const S zero = scalar_traits<S>::zero(), one = scalar_traits<S>::one();
    for (int trial = 0; trial < 10; ++trial) {
        S t1 = random_scalar<S>(rng), t2 = random_scalar<S>(rng);
        // gluing of g with multiplier B and of g_i with multiplier c_i
        S lhs = bilinear(p.gcoef, one, zero, t1, t2) - p.B * bilinear(p.gcoef, t1, t2, zero, one);
        S l1 = bilinear(p.g1coef, one, zero, t1, t2) - p.c1 * bilinear(p.g1coef, t1, t2, zero, one);
        S l2 = bilinear(p.g2coef, one, zero, t1, t2) - p.c2 * bilinear(p.g2coef, t1, t2, zero, one);
        double scale = scalar_traits<S>::abs(t1) + scalar_traits<S>::abs(t2);
        if (!near_zero(lhs, scale)) throw Error("omega params violate the g gluing identity");
        if (!near_zero(l1, scale) || !near_zero(l2, scale))
            throw Error("omega params violate a g_i gluing identity");
    }
}

template <class S>
BasisFamily<S> make_omega_basis(const OmegaParamsT<S>& p) {
    validate_omega_params(p);
    BasisFamily<S> fam;
    fam.tag = FamilyTag::OmegaRational;
    fam.rank = 2;
    fam.vars = 2;
    fam.eval = [p](int j, const MultiIndex& n, const SpectralPoint<S>& P) {
        if (P.size() != 4) throw ArityMismatch("omega point must be (z1, z2, w1, w2)");
        S g = bilinear_at(p.gcoef, P);
        if (scalar_traits<S>::is_zero(g)) throw PoleHit("omega point on the divisor g = 0");
        S ratios = scalar_traits<S>::one();
        const std::array<S, 4>* gi[2] = {&p.g1coef, &p.g2coef};
        for (int ax = 0; ax < 2; ++ax) {
            if (n[ax] == 0) continue;
            S num = bilinear_at(*gi[ax], P);
            if (n[ax] < 0 && scalar_traits<S>::is_zero(num))
                throw PoleHit("g_" + std::to_string(ax + 1) + " vanishes with negative shift power");
            ratios = ratios * scalar_traits<S>::pow_int(num / g, n[ax]);
        }
        if (j == 0) return P[1] * P[2] / g * ratios;
        if (j != 1) throw Error("omega family has two basis elements");
        // kappa(n) = B^{-1} (c1/B)^{n1} (c2/B)^{n2}; numerator
        // z1 w1 + (kappa/Lambda) z1 w2 + (kappa/Lambda)^2 z2 w2 glues with
        // multiplier Lambda.
        S kappa = scalar_traits<S>::pow_int(p.c1 / p.B, n[0]) *
                  scalar_traits<S>::pow_int(p.c2 / p.B, n[1]) / p.B;
        S b = kappa / p.Lambda;
        S num = P[0] * P[2] + b * P[0] * P[3] + b * b * P[1] * P[3];
        return num / g * ratios;
    };
    fam.sample = [p](int count, std::uint64_t seed, double floor) {
        std::mt19937_64 rng(seed);
        std::vector<SpectralPoint<S>> out;
        long attempts = 0, cap = 500L * count + 500;
        while (static_cast<int>(out.size()) < count) {
            if (++attempts > cap) throw SamplingExhausted("omega sampling exhausted");
            SpectralPoint<S> P;
            for (int i = 0; i < 4; ++i) P.push_back(random_scalar<S>(rng));
            bool ok = scalar_traits<S>::abs(bilinear_at(p.gcoef, P)) >= floor &&
                      scalar_traits<S>::abs(bilinear_at(p.g1coef, P)) >= floor &&
                      scalar_traits<S>::abs(bilinear_at(p.g2coef, P)) >= floor;
            if (ok) out.push_back(std::move(P));
        }
        return out;
    };
    return fam;
}

template <class S>
SpectralFunction<S> omega_eigenvalue(const OmegaParamsT<S>& p, EigenvalueChoice which) {
    SpectralFunction<S> f;
    f.is_pole = [p](const SpectralPoint<S>& P) {
        return scalar_traits<S>::is_zero(bilinear_at(p.gcoef, P));
    };
    f.eval = [p, which](const SpectralPoint<S>& P) {
        S g = bilinear_at(p.gcoef, P);
        if (scalar_traits<S>::is_zero(g)) throw PoleHit("omega point on the divisor g = 0");
        if (which == EigenvalueChoice::Lambda) return P[1] * P[2] / g;
        return P[0] * P[1] * P[2] * P[3] / (g * g);
    };
    return f;
}

template void validate_omega_params<Rat>(const OmegaParamsT<Rat>&, std::uint64_t);
template void validate_omega_params<Cplx>(const OmegaParamsT<Cplx>&, std::uint64_t);
template BasisFamily<Rat> make_omega_basis<Rat>(const OmegaParamsT<Rat>&);
template BasisFamily<Cplx> make_omega_basis<Cplx>(const OmegaParamsT<Cplx>&);
template SpectralFunction<Rat> omega_eigenvalue<Rat>(const OmegaParamsT<Rat>&, EigenvalueChoice);
template SpectralFunction<Cplx> omega_eigenvalue<Cplx>(const OmegaParamsT<Cplx>&, EigenvalueChoice);

// ---------------------------------------------------------------------------
// Gamma family
// ---------------------------------------------------------------------------

namespace {

using Expo = std::vector<int>; // exponent vector of a monomial in t
using Poly = std::map<Expo, Rat>;

void enumerate_degree(int g, int k, Expo& cur, int axis, std::vector<Expo>& out) {
    if (axis == g - 1) {
        cur[static_cast<size_t>(axis)] = k;
        out.push_back(cur);
        return;
    }
    for (int v = k; v >= 0; --v) {
        cur[static_cast<size_t>(axis)] = v;
        enumerate_degree(g, k - v, cur, axis + 1, out);
    }
}

// Degree-k exponent vectors in g variables, deterministic order.
std::vector<Expo> degree_monomials(int g, int k) {
    std::vector<Expo> out;
    Expo cur(static_cast<size_t>(g), 0);
    enumerate_degree(g, k, cur, 0, out);
    return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            Expo e = ea;
            for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
            auto it = out.find(e);
            if (it == out.end())
                out.emplace(e, ca * cb);
            else
                it->second += ca * cb;
        }
    return out;
}

// (P t)^alpha as a polynomial in t.
Poly map_power(const Mat<Rat>& P, const Expo& alpha) {
    const int g = P.rows();
    Poly acc{{Expo(static_cast<size_t>(g), 0), Rat(1)}};
    for (int i = 0; i < g; ++i) {
        Poly row;
        for (int m = 0; m < g; ++m) {
            if (P(i, m).is_zero()) continue;
            Expo e(static_cast<size_t>(g), 0);
            e[static_cast<size_t>(m)] = 1;
            row.emplace(std::move(e), P(i, m));
        }
        for (int rep = 0; rep < alpha[static_cast<size_t>(i)]; ++rep) acc = poly_mul(acc, row);
    }
    return acc;
}

long binom(long n, long r) {
    if (r < 0 || r > n) return 0;
    long v = 1;
    for (long i = 1; i <= r; ++i) v = v * (n - r + i) / i;
    return v;
}

struct GammaCore {
    GammaParams p;
    int g;
    int level;
    std::vector<Expo> monomials; // degree-k exponents, fixed order
    std::vector<Poly> pt_pow;    // per alpha: (P t)^alpha
    std::shared_ptr<std::mutex> mu = std::make_shared<std::mutex>();
    std::shared_ptr<std::map<MultiIndex, std::vector<std::vector<Rat>>>> cache =
        std::make_shared<std::map<MultiIndex, std::vector<std::vector<Rat>>>>();

    int unknowns() const { return (level + 1) * static_cast<int>(monomials.size()); }
    int equations() const { return static_cast<int>(monomials.size()); }

    Rat kappa(const MultiIndex& n) const {
        Rat k = p.Lambda * Rat::pow(p.A, level);
        for (int i = 0; i < g; ++i) k = k * Rat::pow(p.A / p.cvec[static_cast<size_t>(i)], n[i]);
        return k;
    }

    // The gluing system on the coefficients h_{j,alpha} at a fixed n:
    //   h(n, a1, b1, t) - kappa(n) h(n, a2, b2, P t) = 0 for all t,
    // one equation per degree-k monomial in t.
    Mat<Rat> system_matrix(const MultiIndex& n) const {
        const int U = unknowns(), E = equations();
        Mat<Rat> M(E, U);
        Rat kap = kappa(n);
        for (int row = 0; row < E; ++row) {
            const Expo& gamma = monomials[static_cast<size_t>(row)];
            for (int j = 0; j <= level; ++j) {
                Rat w1 = Rat::pow(p.a1, j) * Rat::pow(p.b1, level - j);
                Rat w2 = Rat::pow(p.a2, j) * Rat::pow(p.b2, level - j);
                for (size_t ai = 0; ai < monomials.size(); ++ai) {
                    int col = j * static_cast<int>(monomials.size()) + static_cast<int>(ai);
                    Rat entry(0);
                    if (monomials[ai] == gamma) entry += w1;
                    const Poly& expanded = pt_pow[ai];
                    auto it = expanded.find(gamma);
                    if (it != expanded.end()) entry -= kap * w2 * it->second;
                    M(row, col) = entry;
                }
            }
        }
        return M;
    }

    const std::vector<std::vector<Rat>>& solutions(const MultiIndex& n) const {
        std::lock_guard<std::mutex> lock(*mu);
        auto it = cache->find(n);
        if (it != cache->end()) return it->second;
        auto basis = exact_nullspace(system_matrix(n));
        long expected = gamma_expected_excess(g, level);
        if (static_cast<long>(basis.size()) != expected)
            throw UnexpectedNullspaceDimension(
                "gamma system nullspace has dimension " + std::to_string(basis.size()) +
                ", expected " + std::to_string(expected));
        return cache->emplace(n, std::move(basis)).first->second;
    }

    Rat f_value(const Mat<Rat>& coef, const SpectralPoint<Rat>& P) const {
        Rat v(0);
        for (int i = 0; i < g; ++i)
            v += (coef(i, 0) * P[0] + coef(i, 1) * P[1]) * P[static_cast<size_t>(2 + i)];
        return v;
    }
};

} // namespace

GammaParams gamma_default_g2() {
    GammaParams p;
    p.a1 = Rat(1);
    p.b1 = Rat(0);
    p.a2 = Rat(0);
    p.b2 = Rat(1);
    p.P = Mat<Rat>(2, 2);
    p.P(0, 0) = Rat(2);
    p.P(1, 1) = Rat(3);
    p.A = Rat(1);
    p.cvec = {Rat(2), Rat(-1)};
    p.Lambda = Rat(1);
    // f = (2 z1 + z2) t1 + (3 z1 + z2) t2 satisfies the gluing with A = 1
    p.fcoef = Mat<Rat>(2, 2);
    p.fcoef(0, 0) = Rat(2);
    p.fcoef(0, 1) = Rat(1);
    p.fcoef(1, 0) = Rat(3);
    p.fcoef(1, 1) = Rat(1);
    // f_i = (c_i lambda_i z1 + z2) t_i
    Mat<Rat> f1(2, 2), f2(2, 2);
    f1(0, 0) = p.cvec[0] * Rat(2);
    f1(0, 1) = Rat(1);
    f2(1, 0) = p.cvec[1] * Rat(3);
    f2(1, 1) = Rat(1);
    p.ficoef = {f1, f2};
    return p;
}

template <class S>
void validate_gamma_params(const GammaParamsT<S>& p) {
    const int g = p.P.rows();
    if (p.P.cols() != g || g < 1) throw Error("gamma map must be square");
    if (static_cast<int>(p.cvec.size()) != g || static_cast<int>(p.ficoef.size()) != g)
        throw ArityMismatch("gamma multiplier/coefficient counts do not match g");
    if (scalar_traits<S>::is_zero(p.a1) && scalar_traits<S>::is_zero(p.b1))
        throw Error("(a1, b1) must be nonzero");
    if (scalar_traits<S>::is_zero(p.a2) && scalar_traits<S>::is_zero(p.b2))
        throw Error("(a2, b2) must be nonzero");
    if (scalar_traits<S>::is_zero(p.a1 * p.b2 - p.a2 * p.b1))
        throw Error("[a1, b1] and [a2, b2] must be distinct as projective points");
    if (scalar_traits<S>::is_zero(p.A) || scalar_traits<S>::is_zero(p.Lambda))
        throw Error("A and Lambda must be nonzero");
    for (const auto& c : p.cvec)
        if (scalar_traits<S>::is_zero(c)) throw Error("every c_i must be nonzero");

    // Nondegenerate with distinct eigenvalues. Exact for diagonal maps and
    // for g == 2 (discriminant); eigenvector condition checked where the
    // eigenvectors are available exactly.
    bool diagonal = true;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            if (i != j && !scalar_traits<S>::is_zero(p.P(i, j))) diagonal = false;
    if (diagonal) {
        for (int i = 0; i < g; ++i) {
            if (scalar_traits<S>::is_zero(p.P(i, i))) throw Error("gamma map is singular");
            for (int j = i + 1; j < g; ++j)
                if (scalar_traits<S>::is_zero(p.P(i, i) - p.P(j, j)))
                    throw Error("gamma map must have distinct eigenvalues");
            // eigenvector e_i: f(a1, b1, e_i) != 0
            S f_at = p.fcoef(i, 0) * p.a1 + p.fcoef(i, 1) * p.b1;
            if (scalar_traits<S>::is_zero(f_at))
                throw Error("f vanishes on an eigenvector of the gluing map");
        }
    } else if (g == 2) {
        S tr = p.P(0, 0) + p.P(1, 1);
        S det = p.P(0, 0) * p.P(1, 1) - p.P(0, 1) * p.P(1, 0);
        if (scalar_traits<S>::is_zero(det)) throw Error("gamma map is singular");
        if (scalar_traits<S>::is_zero(tr * tr - scalar_traits<S>::from_int(4) * det))
            throw Error("gamma map must have distinct eigenvalues");
    } else {
        throw Error("distinct-eigenvalue validation supports diagonal maps or g == 2");
    }

    // The gluing identities are linear in t; check them coefficient-wise.
    for (int kk = 0; kk < g; ++kk) {
        S lhs = p.fcoef(kk, 0) * p.a1 + p.fcoef(kk, 1) * p.b1;
        S rhs = scalar_traits<S>::zero();
        for (int i = 0; i < g; ++i)
            rhs += (p.fcoef(i, 0) * p.a2 + p.fcoef(i, 1) * p.b2) * p.P(i, kk);
        if (!near_zero(lhs - p.A * rhs, scalar_traits<S>::abs(lhs)))
            throw Error("f does not satisfy its gluing identity");
        for (int fi = 0; fi < g; ++fi) {
            S l = p.ficoef[static_cast<size_t>(fi)](kk, 0) * p.a1 +
                  p.ficoef[static_cast<size_t>(fi)](kk, 1) * p.b1;
            S r = scalar_traits<S>::zero();
            for (int i = 0; i < g; ++i)
                r += (p.ficoef[static_cast<size_t>(fi)](i, 0) * p.a2 +
                      p.ficoef[static_cast<size_t>(fi)](i, 1) * p.b2) *
                     p.P(i, kk);
            if (!near_zero(l - p.cvec[static_cast<size_t>(fi)] * r, scalar_traits<S>::abs(l)))
                throw Error("f_" + std::to_string(fi + 1) + " does not satisfy its gluing identity");
        }
    }
}

template void validate_gamma_params<Rat>(const GammaParamsT<Rat>&);

long gamma_expected_excess(int g, int k) { return g * binom(g + k - 1, g); }

BasisFamily<Rat> make_gamma_basis(const GammaParams& p, int k) {
    validate_gamma_params(p);
    if (k < 1) throw Error("gamma level k must be >= 1");
    auto core = std::make_shared<GammaCore>();
    core->p = p;
    core->g = p.P.rows();
    core->level = k;
    core->monomials = degree_monomials(core->g, k);
    core->pt_pow.reserve(core->monomials.size());
    for (const auto& alpha : core->monomials) core->pt_pow.push_back(map_power(p.P, alpha));

    // Internal consistency of the counting identity used by the dimension check.
    long excess = core->unknowns() - core->equations();
    if (excess != gamma_expected_excess(core->g, k))
        throw Error("gamma counting identity violated (internal)");

    BasisFamily<Rat> fam;
    fam.tag = FamilyTag::GammaRational;
    fam.rank = static_cast<int>(excess);
    fam.vars = core->g;
    fam.eval = [core](int j, const MultiIndex& n, const SpectralPoint<Rat>& P) {
        if (static_cast<int>(P.size()) != core->g + 2)
            throw ArityMismatch("gamma point must be (z1, z2, t_1..t_g)");
        const auto& basis = core->solutions(n);
        if (j < 0 || j >= static_cast<int>(basis.size()))
            throw Error("gamma basis index out of range");
        Rat f = core->f_value(core->p.fcoef, P);
        if (f.is_zero()) throw PoleHit("gamma point on the divisor f = 0");

        // h(n, P) = sum_{j', alpha} h_{j' alpha} z1^{j'} z2^{k-j'} t^alpha
        Rat h(0);
        const auto& sol = basis[static_cast<size_t>(j)];
        for (int jj = 0; jj <= core->level; ++jj) {
            Rat zpart = Rat::pow(P[0], jj) * Rat::pow(P[1], core->level - jj);
            for (size_t ai = 0; ai < core->monomials.size(); ++ai) {
                const Rat& c = sol[static_cast<size_t>(jj) * core->monomials.size() + ai];
                if (c.is_zero()) continue;
                Rat tpart(1);
                for (int m = 0; m < core->g; ++m)
                    tpart *= Rat::pow(P[static_cast<size_t>(2 + m)],
                                      core->monomials[ai][static_cast<size_t>(m)]);
                h += c * zpart * tpart;
            }
        }

        Rat value = h / Rat::pow(f, core->level);
        for (int i = 0; i < core->g; ++i) {
            if (n[i] == 0) continue;
            Rat fi = core->f_value(core->p.ficoef[static_cast<size_t>(i)], P);
            if (n[i] < 0 && fi.is_zero())
                throw PoleHit("f_" + std::to_string(i + 1) + " vanishes with negative shift power");
            value = value * Rat::pow(fi / f, n[i]);
        }
        return value;
    };
    fam.sample = [core](int count, std::uint64_t seed, double floor) {
        std::mt19937_64 rng(seed);
        std::vector<SpectralPoint<Rat>> out;
        long attempts = 0, cap = 500L * count + 500;
        while (static_cast<int>(out.size()) < count) {
            if (++attempts > cap) throw SamplingExhausted("gamma sampling exhausted");
            SpectralPoint<Rat> P;
            for (int i = 0; i < core->g + 2; ++i) P.push_back(random_scalar<Rat>(rng));
            bool ok = std::fabs(core->f_value(core->p.fcoef, P).to_double()) >= floor;
            for (int i = 0; ok && i < core->g; ++i)
                ok = std::fabs(core->f_value(core->p.ficoef[static_cast<size_t>(i)], P).to_double()) >=
                     floor;
            if (ok) out.push_back(std::move(P));
        }
        return out;
    };
    return fam;
}

} // namespace cdo
