#pragma once

// Sparse truncated polynomials over F_p in variables t_1..t_r and y.

#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <boettcher/errors.hpp>
#include <boettcher/padic.hpp>

namespace boettcher {

/// Exponents are stored as (e_{t_1}, ..., e_{t_r}, e_y). Monomials whose
/// total t-degree exceeds t_cap or whose y-degree exceeds y_cap are dropped;
/// absent keys are zero.
class MVPolynomial {
public:
    using Exponents = std::vector<std::uint16_t>;

    MVPolynomial(std::uint64_t p, std::size_t nvars, std::uint32_t t_cap, std::uint32_t y_cap)
        : p_(p), nvars_(nvars), t_cap_(t_cap), y_cap_(y_cap)
    {
    }

    std::uint64_t prime() const { return p_; }
    std::size_t nvars() const { return nvars_; }
    std::uint32_t t_cap() const { return t_cap_; }
    std::uint32_t y_cap() const { return y_cap_; }
    const std::map<Exponents, Residue> &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    static std::uint32_t t_degree(const Exponents &e)
    {
        return std::accumulate(e.begin(), e.end() - 1, std::uint32_t{0});
    }

    bool within_caps(const Exponents &e) const { return t_degree(e) <= t_cap_ && e.back() <= y_cap_; }

    void add_term(const Exponents &e, const Residue &c)
    {
        if (e.size() != nvars_ + 1) {
            throw usage_error("exponent vector has wrong length");
        }
        if (!within_caps(e) || c.value == 0) {
            return;
        }
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second.value == 0) {
                terms_.erase(it);
            }
        }
    }

    Residue coeff(const Exponents &e) const
    {
        if (!within_caps(e)) {
            throw truncation_error("monomial beyond degree caps");
        }
        auto it = terms_.find(e);
        return it == terms_.end() ? Residue(0, p_) : it->second;
    }

    Residue constant_term() const { return coeff(Exponents(nvars_ + 1, 0)); }

    MVPolynomial same_shape() const { return MVPolynomial(p_, nvars_, t_cap_, y_cap_); }

    friend MVPolynomial operator+(const MVPolynomial &a, const MVPolynomial &b)
    {
        a.check_compatible(b);
        MVPolynomial out = a;
        for (const auto &[e, c] : b.terms_) {
            out.add_term(e, c);
        }
        return out;
    }

    friend MVPolynomial operator-(const MVPolynomial &a, const MVPolynomial &b)
    {
        a.check_compatible(b);
        MVPolynomial out = a;
        for (const auto &[e, c] : b.terms_) {
            out.add_term(e, -c);
        }
        return out;
    }

    friend MVPolynomial operator*(const MVPolynomial &a, const MVPolynomial &b)
    {
        a.check_compatible(b);
        MVPolynomial out = a.same_shape();
        Exponents e(a.nvars_ + 1);
        for (const auto &[ea, ca] : a.terms_) {
            for (const auto &[eb, cb] : b.terms_) {
                for (std::size_t i = 0; i < e.size(); ++i) {
                    e[i] = static_cast<std::uint16_t>(ea[i] + eb[i]);
                }
                out.add_term(e, ca * cb);
            }
        }
        return out;
    }

    MVPolynomial scaled(const Residue &s) const
    {
        MVPolynomial out = same_shape();
        for (const auto &[e, c] : terms_) {
            out.add_term(e, c * s);
        }
        return out;
    }

private:
    void check_compatible(const MVPolynomial &o) const
    {
        if (p_ != o.p_ || nvars_ != o.nvars_ || t_cap_ != o.t_cap_ || y_cap_ != o.y_cap_) {
            throw usage_error("incompatible multivariate polynomials");
        }
    }

    std::uint64_t p_;
    std::size_t nvars_;
    std::uint32_t t_cap_;
    std::uint32_t y_cap_;
    std::map<Exponents, Residue> terms_;
};

/// log(m) = sum_j (-1)^{j-1} (m-1)^j / j, truncated at the caps of m.
/// Fails if a surviving power (m-1)^j needs 1/j with p | j.
inline MVPolynomial mv_log(const MVPolynomial &m)
{
    const auto p = m.prime();
    if (!(m.constant_term() == Residue(1, p))) {
        throw domain_error("mv_log needs constant term 1");
    }
    MVPolynomial one = m.same_shape();
    one.add_term(MVPolynomial::Exponents(m.nvars() + 1, 0), Residue(1, p));
    const MVPolynomial x = m - one;

    MVPolynomial out = m.same_shape();
    MVPolynomial power = x;
    for (std::uint64_t j = 1; !power.is_zero(); ++j) {
        if (j % p == 0) {
            throw domain_error("mv_log: degree caps require inverting " + std::to_string(j) + " mod " +
                               std::to_string(p));
        }
        auto c = Residue(j % 2 == 1 ? 1 : -1, p) * Residue(static_cast<std::int64_t>(j), p).inverse();
        out = out + power.scaled(c);
        power = power * x;
    }
    return out;
}

} // namespace boettcher
