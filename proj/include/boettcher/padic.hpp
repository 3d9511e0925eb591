#pragma once

// Exact integers/rationals and the base-p digit combinatorics (valuations,
// digit sums, Legendre, carry defects, reduction mod p).

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include <boettcher/errors.hpp>

namespace boettcher {

using BigInt = mpz_class;
using BigRational = mpq_class;

inline BigRational make_rational(const BigInt &num, const BigInt &den)
{
    if (den == 0) {
        throw domain_error("zero denominator");
    }
    BigRational x(num, den);
    x.canonicalize();
    return x;
}

inline BigInt factorial(std::uint64_t n)
{
    BigInt r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return r;
}

inline BigInt ipow(const BigInt &base, std::uint64_t e)
{
    BigInt r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(e));
    return r;
}

inline BigInt binomial(std::uint64_t n, std::uint64_t k)
{
    BigInt r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

inline std::string to_string(const BigRational &x) { return x.get_str(); }

// ---------------------------------------------------------------------------
// Primes

inline bool is_prime(std::uint64_t n)
{
    if (n < 2) {
        return false;
    }
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            return false;
        }
    }
    return true;
}

/// Every supported prime is odd; p = 2 is rejected here.
inline void require_odd_prime(std::uint64_t p)
{
    if (!is_prime(p)) {
        throw usage_error("p = " + std::to_string(p) + " is not prime");
    }
    if (p == 2) {
        throw usage_error("p = 2 is not supported; p must be an odd prime");
    }
}

// ---------------------------------------------------------------------------
// Valuation

/// p-adic valuation; zero has the infinite valuation, which compares above
/// every finite value.
class Valuation {
public:
    constexpr Valuation(std::int64_t v) : value_(v) {}

    static constexpr Valuation infinite() { return Valuation(); }

    constexpr bool is_infinite() const { return !value_.has_value(); }
    constexpr bool is_finite() const { return value_.has_value(); }

    std::int64_t value() const
    {
        if (!value_) {
            throw domain_error("valuation of zero is infinite");
        }
        return *value_;
    }

    friend constexpr bool operator==(const Valuation &a, const Valuation &b) = default;

    friend constexpr std::strong_ordering operator<=>(const Valuation &a, const Valuation &b)
    {
        if (a.is_infinite() || b.is_infinite()) {
            return a.is_infinite() <=> b.is_infinite();
        }
        return *a.value_ <=> *b.value_;
    }

    friend constexpr Valuation operator+(const Valuation &a, const Valuation &b)
    {
        if (a.is_infinite() || b.is_infinite()) {
            return infinite();
        }
        return Valuation(*a.value_ + *b.value_);
    }

    std::string str() const { return value_ ? std::to_string(*value_) : std::string("inf"); }

    friend std::ostream &operator<<(std::ostream &os, const Valuation &v) { return os << v.str(); }

private:
    constexpr Valuation() = default;
    std::optional<std::int64_t> value_;
};

inline Valuation ord_p(const BigInt &x, std::uint64_t p)
{
    require_odd_prime(p);
    if (x == 0) {
        return Valuation::infinite();
    }
    BigInt rest;
    BigInt prime(static_cast<unsigned long>(p));
    auto v = mpz_remove(rest.get_mpz_t(), x.get_mpz_t(), prime.get_mpz_t());
    return Valuation(static_cast<std::int64_t>(v));
}

inline Valuation ord_p(const BigRational &x, std::uint64_t p)
{
    require_odd_prime(p);
    if (x == 0) {
        return Valuation::infinite();
    }
    return Valuation(ord_p(BigInt(x.get_num()), p).value() - ord_p(BigInt(x.get_den()), p).value());
}

inline Valuation ord_p(std::int64_t x, std::uint64_t p)
{
    require_odd_prime(p);
    if (x == 0) {
        return Valuation::infinite();
    }
    std::uint64_t u = x < 0 ? static_cast<std::uint64_t>(-x) : static_cast<std::uint64_t>(x);
    std::int64_t v = 0;
    while (u % p == 0) {
        u /= p;
        ++v;
    }
    return Valuation(v);
}

// ---------------------------------------------------------------------------
// Digits

/// Base-p expansion, least significant digit first. Zero has no digits.
struct DigitExpansion {
    std::uint64_t base = 3;
    std::vector<std::uint64_t> digits;

    std::uint64_t value() const
    {
        std::uint64_t v = 0;
        for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
            v = v * base + *it;
        }
        return v;
    }

    std::uint64_t digit_sum() const
    {
        std::uint64_t s = 0;
        for (auto d : digits) {
            s += d;
        }
        return s;
    }

    /// Digit at position i, zero beyond the top digit.
    std::uint64_t operator[](std::size_t i) const { return i < digits.size() ? digits[i] : 0; }
};

inline DigitExpansion digits(std::uint64_t n, std::uint64_t p)
{
    DigitExpansion e{p, {}};
    while (n > 0) {
        e.digits.push_back(n % p);
        n /= p;
    }
    return e;
}

/// S_p(n).
inline std::uint64_t digit_sum(std::uint64_t n, std::uint64_t p)
{
    std::uint64_t s = 0;
    while (n > 0) {
        s += n % p;
        n /= p;
    }
    return s;
}

inline std::uint64_t digit_sum(const BigInt &n, std::uint64_t p)
{
    if (n < 0) {
        throw usage_error("digit_sum of a negative integer");
    }
    std::uint64_t s = 0;
    BigInt m = n;
    BigInt q;
    while (m > 0) {
        s += mpz_fdiv_q_ui(q.get_mpz_t(), m.get_mpz_t(), static_cast<unsigned long>(p));
        m = q;
    }
    return s;
}

/// Legendre: ord_p(n!) = (n - S_p(n)) / (p - 1).
inline Valuation factorial_valuation(std::uint64_t n, std::uint64_t p)
{
    return Valuation(static_cast<std::int64_t>((n - digit_sum(n, p)) / (p - 1)));
}

/// Number of base-p carries when adding the summands; always a nonnegative integer.
inline std::uint64_t carry_defect(std::span<const std::uint64_t> summands, std::uint64_t p)
{
    if (summands.empty()) {
        throw usage_error("carry_defect needs at least one summand");
    }
    std::uint64_t total = 0;
    std::uint64_t digit_total = 0;
    for (auto n : summands) {
        total += n;
        digit_total += digit_sum(n, p);
    }
    return (digit_total - digit_sum(total, p)) / (p - 1);
}

inline bool is_power_of(std::uint64_t n, std::uint64_t p)
{
    if (n == 0) {
        return false;
    }
    while (n % p == 0) {
        n /= p;
    }
    return n == 1;
}

inline std::uint64_t upow(std::uint64_t b, std::uint64_t e)
{
    std::uint64_t r = 1;
    while (e-- > 0) {
        r *= b;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Residues mod p

/// Element of F_p. The modulus travels with the value so series over F_p can
/// be built without a global context.
struct Residue {
    std::uint64_t value = 0;
    std::uint64_t modulus = 0;

    Residue() = default;
    Residue(std::int64_t v, std::uint64_t p) : modulus(p)
    {
        auto m = static_cast<std::int64_t>(p);
        value = static_cast<std::uint64_t>(((v % m) + m) % m);
    }

    friend bool operator==(const Residue &a, const Residue &b) = default;

    friend Residue operator+(Residue a, const Residue &b)
    {
        a.value = (a.value + b.value) % a.modulus;
        return a;
    }
    friend Residue operator-(Residue a, const Residue &b)
    {
        a.value = (a.value + a.modulus - b.value) % a.modulus;
        return a;
    }
    friend Residue operator*(Residue a, const Residue &b)
    {
        a.value = (a.value * b.value) % a.modulus;
        return a;
    }
    Residue operator-() const { return Residue(0, modulus) - *this; }
    Residue &operator+=(const Residue &b) { return *this = *this + b; }
    Residue &operator-=(const Residue &b) { return *this = *this - b; }
    Residue &operator*=(const Residue &b) { return *this = *this * b; }

    Residue pow(std::uint64_t e) const
    {
        Residue r(1, modulus);
        Residue b = *this;
        while (e > 0) {
            if (e & 1U) {
                r *= b;
            }
            b *= b;
            e >>= 1U;
        }
        return r;
    }

    Residue inverse() const
    {
        if (value == 0) {
            throw domain_error("inverse of 0 mod " + std::to_string(modulus));
        }
        return pow(modulus - 2);
    }

    friend std::ostream &operator<<(std::ostream &os, const Residue &r) { return os << r.value; }
};

inline std::uint64_t mod_ui(const BigInt &x, std::uint64_t p)
{
    return mpz_fdiv_ui(x.get_mpz_t(), static_cast<unsigned long>(p));
}

/// numerator * denominator^{-1} mod p; requires ord_p(x) >= 0.
inline Residue mod_p_reduce(const BigRational &x, std::uint64_t p)
{
    auto den = mod_ui(BigInt(x.get_den()), p);
    if (den == 0) {
        throw integrality_error("ord_p(" + x.get_str() + ") < 0 for p = " + std::to_string(p));
    }
    Residue n(static_cast<std::int64_t>(mod_ui(BigInt(x.get_num()), p)), p);
    return n * Residue(static_cast<std::int64_t>(den), p).inverse();
}

inline Residue mod_p_reduce(const BigInt &x, std::uint64_t p)
{
    return Residue(static_cast<std::int64_t>(mod_ui(x, p)), p);
}

/// p^{-t} x mod p, where t must be exactly ord_p(x).
inline Residue unit_part_mod_p(const BigRational &x, std::uint64_t p, std::int64_t expected_valuation)
{
    auto v = ord_p(x, p);
    if (v != Valuation(expected_valuation)) {
        throw valuation_mismatch(expected_valuation, v.str());
    }
    BigRational scaled = x;
    BigInt pt = ipow(BigInt(static_cast<unsigned long>(p)), static_cast<std::uint64_t>(
                                                               expected_valuation < 0 ? -expected_valuation : expected_valuation));
    if (expected_valuation >= 0) {
        scaled /= BigRational(pt);
    } else {
        scaled *= BigRational(pt);
    }
    return mod_p_reduce(scaled, p);
}

/// T_p(n) mod p, the prime-to-p part of n!, by splitting n! into blocks of p
/// consecutive integers (each block contributes (p-1)! = -1).
inline Residue prime_part_factorial_mod_p(std::uint64_t n, std::uint64_t p)
{
    Residue r(1, p);
    while (n > 1) {
        if ((n / p) % 2 == 1) {
            r = -r;
        }
        for (std::uint64_t i = 2; i <= n % p; ++i) {
            r *= Residue(static_cast<std::int64_t>(i), p);
        }
        n /= p;
    }
    return r;
}

/// (-1)^e as a residue.
inline Residue sign_residue(std::int64_t e, std::uint64_t p)
{
    return Residue((e % 2 == 0) ? 1 : -1, p);
}

} // namespace boettcher
