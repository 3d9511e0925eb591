#pragma once

// Truncated univariate power series over BigRational or F_p.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boettcher/errors.hpp>
#include <boettcher/padic.hpp>

namespace boettcher {

template <typename R>
struct ring_traits;

template <>
struct ring_traits<BigRational> {
    static BigRational from_int(std::int64_t n, const BigRational &) { return BigRational(static_cast<long>(n)); }
    static BigRational inverse(const BigRational &x)
    {
        if (x == 0) {
            throw domain_error("division by zero");
        }
        return 1 / x;
    }
    static bool is_zero(const BigRational &x) { return x == 0; }
    static std::uint64_t characteristic(const BigRational &) { return 0; }
};

template <>
struct ring_traits<Residue> {
    static Residue from_int(std::int64_t n, const Residue &like) { return Residue(n, like.modulus); }
    static Residue inverse(const Residue &x) { return x.inverse(); }
    static bool is_zero(const Residue &x) { return x.value == 0; }
    static std::uint64_t characteristic(const Residue &x) { return x.modulus; }
};

template <typename R>
concept Coefficient = requires(const R &a, const R &b) {
    { a + b } -> std::convertible_to<R>;
    { a - b } -> std::convertible_to<R>;
    { a * b } -> std::convertible_to<R>;
    ring_traits<R>::from_int(0, a);
};

/// c_0 + c_1 x + ... + c_K x^K + O(x^{K+1}). Binary operations truncate at
/// the smaller order; reading a coefficient past K is an error.
template <Coefficient R>
class PowerSeries {
public:
    using traits = ring_traits<R>;

    explicit PowerSeries(std::vector<R> coeffs) : c_(std::move(coeffs))
    {
        if (c_.empty()) {
            throw usage_error("power series needs at least one coefficient");
        }
    }

    static PowerSeries zero(std::size_t order, const R &like = R{})
    {
        return PowerSeries(std::vector<R>(order + 1, traits::from_int(0, like)));
    }

    static PowerSeries constant(const R &c, std::size_t order)
    {
        auto s = zero(order, c);
        s.c_[0] = c;
        return s;
    }

    std::size_t order() const { return c_.size() - 1; }

    const R &coeff(std::size_t i) const
    {
        if (i >= c_.size()) {
            throw truncation_error("coefficient " + std::to_string(i) + " beyond truncation order " +
                                   std::to_string(order()));
        }
        return c_[i];
    }

    const R &operator[](std::size_t i) const { return coeff(i); }

    std::span<const R> coefficients() const { return c_; }

    const R &like() const { return c_[0]; }

    PowerSeries truncated(std::size_t order) const
    {
        if (order >= c_.size()) {
            return *this;
        }
        return PowerSeries(std::vector<R>(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(order) + 1));
    }

    friend bool operator==(const PowerSeries &a, const PowerSeries &b) { return a.c_ == b.c_; }

    friend PowerSeries operator+(const PowerSeries &a, const PowerSeries &b)
    {
        auto k = std::min(a.order(), b.order());
        std::vector<R> out(k + 1);
        for (std::size_t i = 0; i <= k; ++i) {
            out[i] = a.c_[i] + b.c_[i];
        }
        return PowerSeries(std::move(out));
    }

    friend PowerSeries operator-(const PowerSeries &a, const PowerSeries &b)
    {
        auto k = std::min(a.order(), b.order());
        std::vector<R> out(k + 1);
        for (std::size_t i = 0; i <= k; ++i) {
            out[i] = a.c_[i] - b.c_[i];
        }
        return PowerSeries(std::move(out));
    }

    PowerSeries scaled(const R &s) const
    {
        std::vector<R> out(c_);
        for (auto &x : out) {
            x = x * s;
        }
        return PowerSeries(std::move(out));
    }

    friend PowerSeries operator*(const PowerSeries &a, const PowerSeries &b) { return ps_mul(a, b); }

    /// Cauchy product truncated at min(K_a, K_b).
    friend PowerSeries ps_mul(const PowerSeries &a, const PowerSeries &b)
    {
        auto k = std::min(a.order(), b.order());
        std::vector<R> out(k + 1, traits::from_int(0, a.like()));
        for (std::size_t i = 0; i <= k; ++i) {
            if (traits::is_zero(a.c_[i])) {
                continue;
            }
            for (std::size_t j = 0; i + j <= k; ++j) {
                if (!traits::is_zero(b.c_[j])) {
                    out[i + j] += a.c_[i] * b.c_[j];
                }
            }
        }
        return PowerSeries(std::move(out));
    }

private:
    std::vector<R> c_;
};

/// s^e by repeated squaring.
template <Coefficient R>
PowerSeries<R> ps_pow(const PowerSeries<R> &s, std::uint64_t e)
{
    if (e == 0) {
        throw usage_error("ps_pow exponent must be >= 1");
    }
    std::optional<PowerSeries<R>> result;
    PowerSeries<R> base = s;
    while (true) {
        if (e & 1U) {
            result = result ? ps_mul(*result, base) : base;
        }
        e >>= 1U;
        if (e == 0) {
            break;
        }
        base = ps_mul(base, base);
    }
    return *result;
}

/// s(x^q) truncated at `order`; only the first floor(order/q) input terms are read.
template <Coefficient R>
PowerSeries<R> ps_substitute_power(const PowerSeries<R> &s, std::uint64_t q, std::size_t order)
{
    if (q == 0) {
        throw usage_error("substitution exponent must be >= 1");
    }
    auto out = std::vector<R>(order + 1, ring_traits<R>::from_int(0, s.like()));
    for (std::size_t i = 0; i * q <= order; ++i) {
        out[i * q] = s.coeff(i);
    }
    return PowerSeries<R>(std::move(out));
}

namespace detail {

template <Coefficient R>
void require_invertible_range(const PowerSeries<R> &s, const char *op)
{
    auto ch = ring_traits<R>::characteristic(s.like());
    if (ch != 0 && s.order() >= ch) {
        throw domain_error(std::string(op) + " needs 1/m for m <= " + std::to_string(s.order()) +
                           ", which does not exist mod " + std::to_string(ch));
    }
}

} // namespace detail

/// 1/s; the constant term must be invertible.
template <Coefficient R>
PowerSeries<R> ps_inverse(const PowerSeries<R> &s)
{
    using T = ring_traits<R>;
    auto k = s.order();
    auto inv0 = T::inverse(s[0]);
    std::vector<R> out(k + 1, T::from_int(0, s.like()));
    out[0] = inv0;
    for (std::size_t n = 1; n <= k; ++n) {
        auto acc = T::from_int(0, s.like());
        for (std::size_t j = 1; j <= n; ++j) {
            acc += s[j] * out[n - j];
        }
        out[n] = T::from_int(0, s.like()) - acc * inv0;
    }
    return PowerSeries<R>(std::move(out));
}

/// Formal logarithm via L' = s'/s; requires s_0 = 1.
template <Coefficient R>
PowerSeries<R> ps_log(const PowerSeries<R> &s)
{
    using T = ring_traits<R>;
    if (!(s[0] == T::from_int(1, s.like()))) {
        throw domain_error("ps_log needs constant term 1");
    }
    detail::require_invertible_range(s, "ps_log");
    auto k = s.order();
    std::vector<R> out(k + 1, T::from_int(0, s.like()));
    for (std::size_t n = 1; n <= k; ++n) {
        R acc = T::from_int(static_cast<std::int64_t>(n), s.like()) * s[n];
        for (std::size_t j = 1; j < n; ++j) {
            acc -= T::from_int(static_cast<std::int64_t>(j), s.like()) * out[j] * s[n - j];
        }
        out[n] = acc * T::inverse(T::from_int(static_cast<std::int64_t>(n), s.like()));
    }
    return PowerSeries<R>(std::move(out));
}

/// Formal exponential via E' = s'E; requires s_0 = 0.
template <Coefficient R>
PowerSeries<R> ps_exp(const PowerSeries<R> &s)
{
    using T = ring_traits<R>;
    if (!T::is_zero(s[0])) {
        throw domain_error("ps_exp needs constant term 0");
    }
    detail::require_invertible_range(s, "ps_exp");
    auto k = s.order();
    std::vector<R> out(k + 1, T::from_int(0, s.like()));
    out[0] = T::from_int(1, s.like());
    for (std::size_t n = 1; n <= k; ++n) {
        auto acc = T::from_int(0, s.like());
        for (std::size_t j = 1; j <= n; ++j) {
            acc += T::from_int(static_cast<std::int64_t>(j), s.like()) * s[j] * out[n - j];
        }
        out[n] = acc * T::inverse(T::from_int(static_cast<std::int64_t>(n), s.like()));
    }
    return PowerSeries<R>(std::move(out));
}

/// x * s, keeping the truncation order (top coefficient drops out).
template <Coefficient R>
PowerSeries<R> ps_shift(const PowerSeries<R> &s)
{
    std::vector<R> out(s.order() + 1, ring_traits<R>::from_int(0, s.like()));
    for (std::size_t i = 1; i <= s.order(); ++i) {
        out[i] = s[i - 1];
    }
    return PowerSeries<R>(std::move(out));
}

/// D = 1 + y d/dy applied m times: y^j coefficient scaled by (j+1)^m.
template <Coefficient R>
PowerSeries<R> ps_apply_d(const PowerSeries<R> &s, std::uint64_t m)
{
    using T = ring_traits<R>;
    std::vector<R> out(s.coefficients().begin(), s.coefficients().end());
    for (std::size_t j = 0; j < out.size(); ++j) {
        for (std::uint64_t t = 0; t < m; ++t) {
            out[j] = out[j] * T::from_int(static_cast<std::int64_t>(j + 1), s.like());
        }
    }
    return PowerSeries<R>(std::move(out));
}

/// N = y d/dy applied m times.
template <Coefficient R>
PowerSeries<R> ps_apply_n(const PowerSeries<R> &s, std::uint64_t m)
{
    using T = ring_traits<R>;
    std::vector<R> out(s.coefficients().begin(), s.coefficients().end());
    for (std::size_t j = 0; j < out.size(); ++j) {
        for (std::uint64_t t = 0; t < m; ++t) {
            out[j] = out[j] * T::from_int(static_cast<std::int64_t>(j), s.like());
        }
    }
    return PowerSeries<R>(std::move(out));
}

using RationalSeries = PowerSeries<BigRational>;
using ResidueSeries = PowerSeries<Residue>;

/// Coefficientwise reduction mod p.
inline ResidueSeries reduce_mod_p(const RationalSeries &s, std::uint64_t p)
{
    std::vector<Residue> out;
    out.reserve(s.order() + 1);
    for (const auto &c : s.coefficients()) {
        out.push_back(mod_p_reduce(c, p));
    }
    return ResidueSeries(std::move(out));
}

} // namespace boettcher
