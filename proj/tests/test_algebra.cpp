#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdo/difference_operator.hpp"
#include "test_util.hpp"

using namespace cdo;

namespace {

Rat random_rat(std::mt19937_64& rng) {
    return Rat(testutil::rand_int(rng, -9, 9), testutil::rand_int(rng, 1, 9));
}

// Random rational polynomial in (n1, n2) of degree <= 2, as a coefficient.
LatticeFunction<Rat> random_poly_coeff(std::mt19937_64& rng, int g) {
    std::vector<Rat> c;
    for (int i = 0; i < 6; ++i) c.push_back(random_rat(rng));
    return LatticeFunction<Rat>::scalar(g, [c, g](const MultiIndex& n) {
        Rat x(n[0]), y(g > 1 ? n[1] : 0);
        return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
    });
}

DifferenceOperator<Rat> random_operator(std::mt19937_64& rng, int g, int max_terms = 3) {
    DifferenceOperator<Rat> d(g, Arity{1, 1});
    long nt = testutil::rand_int(rng, 1, max_terms);
    for (long t = 0; t < nt; ++t) {
        MultiIndex k = MultiIndex::zero(g);
        for (int i = 0; i < g; ++i) k[i] = static_cast<int>(testutil::rand_int(rng, -2, 2));
        d.add_term(k, random_poly_coeff(rng, g));
    }
    return d;
}

LatticeFunction<Rat> random_psi(std::mt19937_64& rng, int g) { return random_poly_coeff(rng, g); }

const MultiIndex e1 = MultiIndex::unit(2, 0);
const MultiIndex e2 = MultiIndex::unit(2, 1);

} // namespace

TEST_CASE("apply: pure shift and multiplication operator") {
    auto psi = LatticeFunction<Rat>::scalar(2, [](const MultiIndex& n) {
        return Rat(n[0] * n[0] + 3 * n[1] + 1);
    });

    auto T1 = DifferenceOperator<Rat>::shift_op(2, e1);
    MultiIndex n({std::vector<int>{2, -1}});
    CHECK(T1.apply_at(psi, n)(0, 0) == psi(n + e1)(0, 0));

    auto f = LatticeFunction<Rat>::scalar(2, [](const MultiIndex& n) { return Rat(2 * n[0] - n[1]); });
    DifferenceOperator<Rat> mult(2, Arity{1, 1});
    mult.add_term(MultiIndex::zero(2), f);
    CHECK(mult.apply_at(psi, n)(0, 0) == f(n)(0, 0) * psi(n)(0, 0));
}

TEST_CASE("compose implements the skew relation T^a f = f(.+a) T^a") {
    auto f = LatticeFunction<Rat>::scalar(2, [](const MultiIndex& n) { return Rat(5 * n[0] + n[1]); });
    auto T1 = DifferenceOperator<Rat>::shift_op(2, e1);
    DifferenceOperator<Rat> fT1(2, Arity{1, 1});
    fT1.add_term(e1, f);

    auto prod = T1.compose(fT1); // = f(n+e1) T1^2
    REQUIRE(prod.terms().size() == 1);
    CHECK(prod.terms()[0].shift == e1 + e1);
    MultiIndex n({std::vector<int>{3, 4}});
    CHECK(prod.terms()[0].coeff(n)(0, 0) == f(n + e1)(0, 0));
}

TEST_CASE("compose with identity is identity") {
    std::mt19937_64 rng(41);
    auto A = random_operator(rng, 2);
    auto Id = DifferenceOperator<Rat>::identity(2);
    auto AI = A.compose(Id);
    auto IA = Id.compose(A);
    auto psi = random_psi(rng, 2);
    LatticeWindow w = LatticeWindow::cube(2, -3, 3);
    w.for_each([&](const MultiIndex& n) {
        CHECK(A.apply_at(psi, n)(0, 0) == AI.apply_at(psi, n)(0, 0));
        CHECK(A.apply_at(psi, n)(0, 0) == IA.apply_at(psi, n)(0, 0));
    });
}

TEST_CASE("apply/compose consistency and associativity, exactly, on random triples") {
    std::mt19937_64 rng(42);
    LatticeWindow window = LatticeWindow::cube(2, -4, 4);
    for (int trial = 0; trial < 100; ++trial) {
        auto A = random_operator(rng, 2);
        auto B = random_operator(rng, 2);
        auto C = random_operator(rng, 2);
        auto psi = random_psi(rng, 2);

        auto AB = A.compose(B);
        auto BC = B.compose(C);
        auto left = A.compose(BC);
        auto right = AB.compose(C);

        // no two terms share a shift after composition
        for (size_t i = 0; i + 1 < AB.terms().size(); ++i)
            CHECK(AB.terms()[i].shift < AB.terms()[i + 1].shift);

        window.for_each([&](const MultiIndex& n) {
            // apply(compose(A,B), psi) == apply(A, apply(B, psi))
            Rat via_compose = AB.apply_at(psi, n)(0, 0);
            auto Bpsi = LatticeFunction<Rat>::scalar(
                2, [&B, &psi](const MultiIndex& m) { return B.apply_at(psi, m)(0, 0); });
            Rat via_nested = A.apply_at(Bpsi, n)(0, 0);
            CHECK(via_compose == via_nested);

            // associativity
            CHECK(left.apply_at(psi, n)(0, 0) == right.apply_at(psi, n)(0, 0));
        });
    }
}

TEST_CASE("compose distributes over term-wise addition") {
    std::mt19937_64 rng(43);
    LatticeWindow window = LatticeWindow::cube(2, -4, 4);
    for (int trial = 0; trial < 25; ++trial) {
        auto A = random_operator(rng, 2);
        auto B = random_operator(rng, 2);
        auto C = random_operator(rng, 2);
        auto psi = random_psi(rng, 2);
        auto lhs = A.compose(B + C);
        auto rhs = A.compose(B) + A.compose(C);
        window.for_each([&](const MultiIndex& n) {
            CHECK(lhs.apply_at(psi, n)(0, 0) == rhs.apply_at(psi, n)(0, 0));
        });
    }
}

TEST_CASE("commutator basics") {
    std::mt19937_64 rng(44);
    LatticeWindow window = LatticeWindow::cube(2, -4, 4);

    auto A = random_operator(rng, 2);
    auto AA = commutator(A, A);
    auto zc = is_zero_on_window(AA, window, 0.0);
    CHECK(zc.is_zero);
    CHECK(zc.max_residual == 0.0);

    auto T1 = DifferenceOperator<Rat>::shift_op(2, e1);
    auto T2 = DifferenceOperator<Rat>::shift_op(2, e2);
    CHECK(is_zero_on_window(commutator(T1, T2), window, 0.0).is_zero);

    // [T1, f] = (f(n+e1) - f(n)) T1
    auto f = LatticeFunction<Rat>::scalar(2, [](const MultiIndex& n) { return Rat(n[0] * n[0] - 2 * n[1]); });
    DifferenceOperator<Rat> F(2, Arity{1, 1});
    F.add_term(MultiIndex::zero(2), f);
    auto comm = commutator(T1, F);
    window.for_each([&](const MultiIndex& n) {
        const auto* c = comm.coefficient(e1);
        REQUIRE(c != nullptr);
        CHECK((*c)(n)(0, 0) == f(n + e1)(0, 0) - f(n)(0, 0));
    });

    // n1 * identity does not commute with T1: [T1, n1] = T1
    auto n1 = LatticeFunction<Rat>::scalar(2, [](const MultiIndex& n) { return Rat(n[0]); });
    DifferenceOperator<Rat> N1(2, Arity{1, 1});
    N1.add_term(MultiIndex::zero(2), n1);
    auto cz = is_zero_on_window(commutator(T1, N1), window, 0.0);
    CHECK(!cz.is_zero);
}

TEST_CASE("is_zero_on_window thresholds and errors") {
    LatticeWindow window = LatticeWindow::cube(2, -2, 2);

    auto Z = DifferenceOperator<Rat>::zero(2, Arity{1, 1});
    auto zc = is_zero_on_window(Z, window, 0.0);
    CHECK(zc.is_zero);
    CHECK(zc.max_residual == 0.0);

    DifferenceOperator<Cplx> small(2, Arity{1, 1});
    small.add_term(e1, LatticeFunction<Cplx>::constant(2, Mat<Cplx>::scalar1x1(Cplx(1e-3, 0.0))));
    auto sc = is_zero_on_window(small, window, 1e-6);
    CHECK(!sc.is_zero);
    CHECK(sc.max_residual == doctest::Approx(1e-3));

    CHECK_THROWS_AS(LatticeWindow::cube(2, 2, 1), EmptyWindow);
    CHECK_THROWS_AS(is_zero_on_window(Z, window, 1e-9), Error); // exact field wants tol == 0
}

TEST_CASE("pole sets propagate through composition and are reported") {
    auto f = LatticeFunction<Rat>::scalar(
        2, [](const MultiIndex& n) { return Rat(1, n[0] + 2); },
        [](const MultiIndex& n) { return n[0] == -2; }, "1/(n1+2)");
    DifferenceOperator<Rat> F(2, Arity{1, 1});
    F.add_term(MultiIndex::zero(2), f);
    auto T1 = DifferenceOperator<Rat>::shift_op(2, e1);
    auto FT = F.compose(T1);
    CHECK_THROWS_AS(FT.terms()[0].coeff(MultiIndex({std::vector<int>{-2, 0}})), PoleHit);

    // T1 o F reads f at n+e1, so the pole moves to n1 == -3
    auto TF = T1.compose(F);
    CHECK_THROWS_AS(TF.terms()[0].coeff(MultiIndex({std::vector<int>{-3, 0}})), PoleHit);
    CHECK(TF.terms()[0].coeff(MultiIndex({std::vector<int>{-2, 0}}))(0, 0) == Rat(1));

    auto zc = is_zero_on_window(FT, LatticeWindow::cube(2, -3, 0), 0.0);
    CHECK(!zc.is_zero);
    CHECK(zc.skips.size() == 4); // the n1 == -2 line of a 4x4 window
}

TEST_CASE("matrix arities are enforced") {
    auto A = DifferenceOperator<Rat>::identity(2, 2);
    auto s = DifferenceOperator<Rat>::identity(2, 1);
    CHECK_THROWS_AS(A.compose(s), ArityMismatch);
    CHECK_THROWS_AS(A + s, ArityMismatch);

    auto psi_bad = LatticeFunction<Rat>::scalar(2, [](const MultiIndex&) { return Rat(1); });
    CHECK_THROWS_AS(A.apply_at(psi_bad, MultiIndex::zero(2)), ArityMismatch);
}

TEST_CASE("matrix compose matches hand expansion") {
    // A = [[T1, 0],[0, 1]], B = [[f, 0],[0, T2]] with matrix coefficients.
    auto f = [](const MultiIndex& n) { return Rat(3 * n[0] + n[1] + 1); };
    DifferenceOperator<Rat> A(2, Arity{2, 2});
    {
        Mat<Rat> e11(2, 2), e22(2, 2);
        e11(0, 0) = Rat(1);
        e22(1, 1) = Rat(1);
        A.add_term(e1, LatticeFunction<Rat>::constant(2, e11));
        A.add_term(MultiIndex::zero(2), LatticeFunction<Rat>::constant(2, e22));
    }
    DifferenceOperator<Rat> B(2, Arity{2, 2});
    {
        auto coeff0 = LatticeFunction<Rat>(2, Arity{2, 2}, [f](const MultiIndex& n) {
            Mat<Rat> m(2, 2);
            m(0, 0) = f(n);
            return m;
        });
        Mat<Rat> e22(2, 2);
        e22(1, 1) = Rat(1);
        B.add_term(MultiIndex::zero(2), coeff0);
        B.add_term(e2, LatticeFunction<Rat>::constant(2, e22));
    }
    auto AB = A.compose(B);
    // entry (0,0) of AB at shift e1 must be f(n+e1); entry (1,1) at e2 must be 1
    MultiIndex n({std::vector<int>{2, 5}});
    const auto* c_e1 = AB.coefficient(e1);
    REQUIRE(c_e1 != nullptr);
    CHECK((*c_e1)(n)(0, 0) == f(n + e1));
    const auto* c_e2 = AB.coefficient(e2);
    REQUIRE(c_e2 != nullptr);
    CHECK((*c_e2)(n)(1, 1) == Rat(1));
}

TEST_CASE("exact to float conversion is available and value-faithful") {
    auto f = LatticeFunction<Rat>::scalar(2, [](const MultiIndex& n) { return Rat(n[0], 4); });
    DifferenceOperator<Rat> F(2, Arity{1, 1});
    F.add_term(e1, f);
    auto Ff = to_float_operator(F);
    MultiIndex n({std::vector<int>{3, 0}});
    CHECK(Ff.terms()[0].coeff(n)(0, 0) == Cplx(0.75, 0.0));
}
