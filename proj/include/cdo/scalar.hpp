#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <string>

#include <gmpxx.h>

#include "cdo/errors.hpp"

namespace cdo {

using Cplx = std::complex<double>;

enum class ScalarField { ComplexFloat, ExactRational };

/// Arbitrary-precision rational number, always kept in lowest terms with a
/// positive denominator (the canonical form maintained by GMP).
class Rat {
  public:
    Rat() : v_(0) {}
    Rat(long n) : v_(n) {}
    Rat(long num, long den) : v_(num, den) {
        if (den == 0) throw Error("rational with zero denominator");
        v_.canonicalize();
    }
    explicit Rat(const mpq_class& q) : v_(q) {}
    // Parses "p/q" or "p".
    static Rat parse(const std::string& s) {
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw Error("cannot parse rational: " + s);
        if (q.get_den() == 0) throw Error("rational with zero denominator: " + s);
        q.canonicalize();
        return Rat(q);
    }

    Rat operator+(const Rat& o) const { return Rat(mpq_class(v_ + o.v_)); }
    Rat operator-(const Rat& o) const { return Rat(mpq_class(v_ - o.v_)); }
    Rat operator*(const Rat& o) const { return Rat(mpq_class(v_ * o.v_)); }
    Rat operator/(const Rat& o) const {
        if (o.is_zero()) throw Error("rational division by zero");
        return Rat(mpq_class(v_ / o.v_));
    }
    Rat operator-() const { return Rat(mpq_class(-v_)); }
    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }

    bool operator==(const Rat& o) const { return v_ == o.v_; }
    bool operator!=(const Rat& o) const { return v_ != o.v_; }
    bool operator<(const Rat& o) const { return v_ < o.v_; }

    bool is_zero() const { return sgn(v_) == 0; }
    double to_double() const { return v_.get_d(); }
    std::string num_str() const { return v_.get_num().get_str(); }
    std::string den_str() const { return v_.get_den().get_str(); }
    std::string str() const {
        return v_.get_den() == 1 ? num_str() : num_str() + "/" + den_str();
    }

    // Integer power; negative exponents invert (zero base is an error then).
    static Rat pow(const Rat& b, long e) {
        if (e == 0) return Rat(1);
        if (e < 0) {
            if (b.is_zero()) throw Error("zero raised to a negative power");
            return pow(Rat(1) / b, -e);
        }
        mpz_class num, den;
        mpz_pow_ui(num.get_mpz_t(), b.v_.get_num().get_mpz_t(), static_cast<unsigned long>(e));
        mpz_pow_ui(den.get_mpz_t(), b.v_.get_den().get_mpz_t(), static_cast<unsigned long>(e));
        return Rat(mpq_class(num, den)); // already canonical: gcd(num,den)=1 is preserved by powers
    }

  private:
    mpq_class v_;
};

inline Rat pow2(long e) { return Rat::pow(Rat(2), e); }          // 2^e, e may be negative
inline Rat sign_pow(long e) { return ((e % 2) + 2) % 2 == 0 ? Rat(1) : Rat(-1); } // (-1)^e

// Integer power of a complex number (negative exponents invert).
inline Cplx cpow_int(const Cplx& b, long e) {
    if (e == 0) return Cplx(1.0, 0.0);
    bool inv = e < 0;
    unsigned long m = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    Cplx acc(1.0, 0.0), base = b;
    while (m) {
        if (m & 1) acc *= base;
        base *= base;
        m >>= 1;
    }
    return inv ? Cplx(1.0, 0.0) / acc : acc;
}

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Cplx> {
    static constexpr ScalarField field = ScalarField::ComplexFloat;
    static constexpr bool exact = false;
    static Cplx zero() { return {0.0, 0.0}; }
    static Cplx one() { return {1.0, 0.0}; }
    static double abs(const Cplx& v) { return std::abs(v); }
    static bool is_zero(const Cplx& v) { return v == zero(); }
    static Cplx from_int(long n) { return Cplx(static_cast<double>(n), 0.0); }
    static Cplx pow_int(const Cplx& b, long e) { return cpow_int(b, e); }
    static std::string str(const Cplx& v) {
        char buf[72];
        std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", v.real(), v.imag());
        return buf;
    }
};

template <>
struct scalar_traits<Rat> {
    static constexpr ScalarField field = ScalarField::ExactRational;
    static constexpr bool exact = true;
    static Rat zero() { return Rat(0); }
    static Rat one() { return Rat(1); }
    static double abs(const Rat& v) { return std::fabs(v.to_double()); }
    static bool is_zero(const Rat& v) { return v.is_zero(); }
    static Rat from_int(long n) { return Rat(n); }
    static Rat pow_int(const Rat& b, long e) { return Rat::pow(b, e); }
    static std::string str(const Rat& v) { return v.str(); }
};

// Explicit, one-directional conversion: exact -> float. There is no float ->
// rational conversion anywhere in the library.
inline Cplx to_cplx(const Rat& r) { return Cplx(r.to_double(), 0.0); }
inline Cplx to_cplx(const Cplx& c) { return c; }

} // namespace cdo
