#pragma once

// Monomial lattices of the B- and C-terms, digit vectors and vector
// partitions, and the series identities built on them.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boettcher/errors.hpp>
#include <boettcher/mv_poly.hpp>
#include <boettcher/padic.hpp>
#include <boettcher/report.hpp>
#include <boettcher/series.hpp>
#include <boettcher/solver.hpp>

namespace boettcher {

// ---------------------------------------------------------------------------
// Multi-indices

/// Sparse exponent vector n -> e_n (every stored e_n >= 1) of a monomial
/// prod a_n^{e_n}.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::map<std::uint64_t, std::uint64_t> entries) : entries_(std::move(entries))
    {
        for (auto it = entries_.begin(); it != entries_.end();) {
            it = it->second == 0 ? entries_.erase(it) : std::next(it);
        }
    }

    const std::map<std::uint64_t, std::uint64_t> &entries() const { return entries_; }

    std::uint64_t exponent(std::uint64_t n) const
    {
        auto it = entries_.find(n);
        return it == entries_.end() ? 0 : it->second;
    }

    /// sigma(e) = sum e_n.
    std::uint64_t sigma() const
    {
        std::uint64_t s = 0;
        for (const auto &[n, e] : entries_) {
            s += e;
        }
        return s;
    }

    /// nu(e) = sum n e_n.
    std::uint64_t weight() const
    {
        std::uint64_t s = 0;
        for (const auto &[n, e] : entries_) {
            s += n * e;
        }
        return s;
    }

    /// Sigma(e) = sum S_p(e_n).
    std::uint64_t exponent_digit_sum(std::uint64_t p) const
    {
        std::uint64_t s = 0;
        for (const auto &[n, e] : entries_) {
            s += digit_sum(e, p);
        }
        return s;
    }

    /// T(e) = sum e_n S_p(n).
    std::uint64_t index_digit_sum(std::uint64_t p) const
    {
        std::uint64_t s = 0;
        for (const auto &[n, e] : entries_) {
            s += e * digit_sum(n, p);
        }
        return s;
    }

    /// Evaluates prod a_n^{e_n} on a table.
    BigRational evaluate(const CoefficientTable &table) const
    {
        BigRational v = 1;
        for (const auto &[n, e] : entries_) {
            const auto &a = table.a(n);
            BigRational num(ipow(BigInt(a.get_num()), e));
            BigRational den(ipow(BigInt(a.get_den()), e));
            v *= num / den;
        }
        return v;
    }

    std::string str() const
    {
        std::string s = "{";
        for (const auto &[n, e] : entries_) {
            if (s.size() > 1) {
                s += ",";
            }
            s += std::to_string(n) + ":" + std::to_string(e);
        }
        return s + "}";
    }

    friend bool operator==(const MultiIndex &, const MultiIndex &) = default;

private:
    std::map<std::uint64_t, std::uint64_t> entries_;
};

/// Coefficient of a^e in B_k[x^k] or C_k[x^k], with its valuation and the
/// carry defects (c(e), d(e)) for B-monomials.
struct MonomialRecord {
    MultiIndex index;
    BigRational coefficient;
    Valuation valuation = Valuation::infinite();
    std::uint64_t carry_c = 0;
    std::uint64_t carry_d = 0;
};

inline constexpr std::uint64_t enumeration_k_guard = 40;

namespace detail {

inline void check_enumeration_guard(std::uint64_t p, std::uint64_t k)
{
    if (p != 3 && k > enumeration_k_guard) {
        throw guard_exceeded("monomial enumeration refused for p = " + std::to_string(p) + ", k = " +
                             std::to_string(k) + " (limit k <= " + std::to_string(enumeration_k_guard) +
                             " unless p = 3)");
    }
}

/// Partitions of n with parts in [1, max_part] and at most max_count parts,
/// each as a nondecreasing part list, in lexicographic order.
inline void for_each_partition(std::uint64_t n, std::uint64_t max_part, std::uint64_t max_count,
                               const std::function<void(const std::vector<std::uint64_t> &)> &visit)
{
    std::vector<std::uint64_t> parts;
    std::function<void(std::uint64_t, std::uint64_t)> rec = [&](std::uint64_t rest, std::uint64_t min_part) {
        if (rest == 0) {
            visit(parts);
            return;
        }
        if (parts.size() == max_count) {
            return;
        }
        for (std::uint64_t part = min_part; part <= std::min(rest, max_part); ++part) {
            // The remaining slots must be able to absorb what is left.
            if ((rest - part) > (max_count - parts.size() - 1) * max_part) {
                continue;
            }
            parts.push_back(part);
            rec(rest - part, part);
            parts.pop_back();
        }
    };
    rec(n, 1);
}

inline MultiIndex index_from_parts(const std::vector<std::uint64_t> &parts, std::uint64_t sigma)
{
    std::map<std::uint64_t, std::uint64_t> e;
    for (auto n : parts) {
        ++e[n];
    }
    e[0] = sigma - parts.size();
    return MultiIndex(std::move(e));
}

/// prod 1/(n!)^{e_n} / prod e_n!, the part shared by both coefficient formulas.
inline BigRational monomial_factor(const MultiIndex &e)
{
    BigInt den = 1;
    for (const auto &[n, en] : e.entries()) {
        den *= factorial(en) * ipow(factorial(n), en);
    }
    return make_rational(BigInt(1), den);
}

} // namespace detail

/// All e with sum e_n = q, sum n e_n = k, indices in 0..k-1; e_0 is whatever
/// remains of q. Ordered lexicographically by the sorted positive parts.
inline std::vector<MultiIndex> enumerate_b_monomials(std::uint64_t p, std::uint64_t k)
{
    require_odd_prime(p);
    if (k < 1) {
        throw usage_error("enumerate_b_monomials needs k >= 1");
    }
    detail::check_enumeration_guard(p, k);
    const auto q = p * p;
    std::vector<MultiIndex> out;
    detail::for_each_partition(k, k - 1, q, [&](const auto &parts) { out.push_back(detail::index_from_parts(parts, q)); });
    return out;
}

/// All e with sum e_n = q + 1, sum n e_n = k - 1, indices in 0..k-1.
inline std::vector<MultiIndex> enumerate_c_monomials(std::uint64_t p, std::uint64_t k)
{
    require_odd_prime(p);
    if (k < 1) {
        throw usage_error("enumerate_c_monomials needs k >= 1");
    }
    detail::check_enumeration_guard(p, k);
    const auto q = p * p;
    std::vector<MultiIndex> out;
    detail::for_each_partition(k - 1, k - 1, q + 1,
                               [&](const auto &parts) { out.push_back(detail::index_from_parts(parts, q + 1)); });
    return out;
}

/// gamma_B(e) = k!/q * q!/prod e_n! * prod 1/(n!)^{e_n}, with
/// ord_p = c(e) + d(e) - 2 checked against the exact valuation.
inline MonomialRecord b_coefficient(const MultiIndex &e, std::uint64_t p, std::uint64_t k)
{
    const auto q = p * p;
    if (e.sigma() != q || e.weight() != k) {
        throw usage_error("b_coefficient: " + e.str() + " is not a B-monomial for k = " + std::to_string(k));
    }
    MonomialRecord rec;
    rec.index = e;
    rec.coefficient = BigRational(factorial(k) * factorial(q)) / BigRational(static_cast<unsigned long>(q)) *
                      detail::monomial_factor(e);
    rec.valuation = ord_p(rec.coefficient, p);

    std::uint64_t t_sum = e.index_digit_sum(p);
    std::uint64_t e_sum = e.exponent_digit_sum(p);
    auto sk = digit_sum(k, p);
    if (t_sum < sk || e_sum < 1 || (t_sum - sk) % (p - 1) != 0 || (e_sum - 1) % (p - 1) != 0) {
        throw std::logic_error("carry defects of " + e.str() + " are not nonnegative integers");
    }
    rec.carry_c = (t_sum - sk) / (p - 1);
    rec.carry_d = (e_sum - 1) / (p - 1);
    auto predicted = static_cast<std::int64_t>(rec.carry_c + rec.carry_d) - 2;
    if (rec.valuation != Valuation(predicted)) {
        throw std::logic_error("B-monomial " + e.str() + ": ord_p = " + rec.valuation.str() +
                               " but c+d-2 = " + std::to_string(predicted));
    }
    return rec;
}

/// gamma_C(e) = k! (q+1)!/prod e_n! * prod 1/(n!)^{e_n}, with
/// (p-1) ord_p = -S_p(k) - 1 + Sigma(e) + T(e) checked.
inline MonomialRecord c_coefficient(const MultiIndex &e, std::uint64_t p, std::uint64_t k)
{
    const auto q = p * p;
    if (k < 1 || e.sigma() != q + 1 || e.weight() != k - 1) {
        throw usage_error("c_coefficient: " + e.str() + " is not a C-monomial for k = " + std::to_string(k));
    }
    MonomialRecord rec;
    rec.index = e;
    rec.coefficient = BigRational(factorial(k) * factorial(q + 1)) * detail::monomial_factor(e);
    rec.valuation = ord_p(rec.coefficient, p);
    auto lhs = static_cast<std::int64_t>(p - 1) * rec.valuation.value();
    auto rhs = -static_cast<std::int64_t>(digit_sum(k, p)) - 1 + static_cast<std::int64_t>(e.exponent_digit_sum(p)) +
               static_cast<std::int64_t>(e.index_digit_sum(p));
    if (lhs != rhs) {
        throw std::logic_error("C-monomial " + e.str() + ": (p-1) ord_p = " + std::to_string(lhs) +
                               " but formula gives " + std::to_string(rhs));
    }
    return rec;
}

/// The exceptional monomial a_0^{q-p} a_1^p.
inline MultiIndex exceptional_monomial(std::uint64_t p)
{
    return MultiIndex({{0, p * p - p}, {1, p}});
}

struct SurvivorClassification {
    std::uint64_t p = 0;
    std::uint64_t k = 0;
    std::uint64_t monomials = 0;
    std::uint64_t unit_monomials = 0;
    std::uint64_t exceptional = 0;
    std::uint64_t all_divisible = 0;
    std::vector<MultiIndex> unexplained;
};

/// Sorts the unit-coefficient B-monomials at p | k into the exceptional one
/// and those whose positive indices are all divisible by p.
inline SurvivorClassification classify_b_survivors(std::uint64_t p, std::uint64_t k)
{
    if (k == 0 || k % p != 0) {
        throw usage_error("classify_b_survivors needs p | k, k >= 1");
    }
    SurvivorClassification out;
    out.p = p;
    out.k = k;
    const auto exceptional = exceptional_monomial(p);
    for (const auto &e : enumerate_b_monomials(p, k)) {
        ++out.monomials;
        auto rec = b_coefficient(e, p, k);
        if (rec.valuation != Valuation(0)) {
            continue;
        }
        ++out.unit_monomials;
        if (e == exceptional) {
            ++out.exceptional;
            continue;
        }
        bool divisible = true;
        for (const auto &[n, en] : e.entries()) {
            if (n > 0 && n % p != 0) {
                divisible = false;
            }
        }
        if (divisible) {
            ++out.all_divisible;
        } else {
            out.unexplained.push_back(e);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Digit vectors and vector partitions

/// (d_1..d_r), digits for the places p, p^2, ..., p^r.
struct DigitVector {
    std::uint64_t p = 3;
    std::vector<std::uint64_t> d;

    std::uint64_t weight() const
    {
        std::uint64_t s = 0;
        for (auto x : d) {
            s += x;
        }
        return s;
    }

    /// N(d) = sum d_i p^i.
    std::uint64_t numeric_value() const
    {
        std::uint64_t v = 0;
        std::uint64_t place = p;
        for (auto x : d) {
            v += x * place;
            place *= p;
        }
        return v;
    }

    /// d! = prod d_i!.
    BigInt factorial() const
    {
        BigInt f = 1;
        for (auto x : d) {
            f *= boettcher::factorial(x);
        }
        return f;
    }

    bool is_zero() const { return weight() == 0; }

    std::string str() const
    {
        std::string s = "(";
        for (std::size_t i = 0; i < d.size(); ++i) {
            s += (i ? "," : "") + std::to_string(d[i]);
        }
        return s + ")";
    }

    friend bool operator==(const DigitVector &, const DigitVector &) = default;
    friend auto operator<=>(const DigitVector &a, const DigitVector &b) { return a.d <=> b.d; }
};

/// Nonzero digit vectors of the given length with 1 <= |d| <= max_weight, in
/// lexicographic order of components.
inline std::vector<DigitVector> enumerate_digit_vectors(std::uint64_t p, std::size_t length, std::uint64_t max_weight)
{
    std::vector<DigitVector> out;
    DigitVector cur{p, std::vector<std::uint64_t>(length, 0)};
    std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t i, std::uint64_t used) {
        if (i == length) {
            if (used > 0) {
                out.push_back(cur);
            }
            return;
        }
        for (std::uint64_t x = 0; x <= p - 1 && used + x <= max_weight; ++x) {
            cur.d[i] = x;
            rec(i + 1, used + x);
        }
        cur.d[i] = 0;
    };
    rec(0, 0);
    return out;
}

/// Multiset {beta^{r_beta}} of nonzero digit vectors with sum r_beta beta = d.
struct VectorPartition {
    std::vector<std::pair<DigitVector, std::uint64_t>> blocks;

    /// R(Pi) = sum r_beta.
    std::uint64_t block_count() const
    {
        std::uint64_t s = 0;
        for (const auto &[beta, mult] : blocks) {
            s += mult;
        }
        return s;
    }

    std::string str() const
    {
        std::string s;
        for (const auto &[beta, mult] : blocks) {
            s += beta.str() + (mult > 1 ? "^" + std::to_string(mult) : "");
        }
        return s;
    }
};

inline constexpr std::uint64_t partition_weight_guard = 6;

/// All vector partitions of d.
inline std::vector<VectorPartition> enumerate_vector_partitions(const DigitVector &d)
{
    if (d.is_zero()) {
        throw usage_error("vector partitions need a nonzero digit vector");
    }
    if (d.weight() > partition_weight_guard) {
        throw guard_exceeded("vector partition enumeration refused for |d| = " + std::to_string(d.weight()) +
                             " (limit " + std::to_string(partition_weight_guard) + ")");
    }
    // Candidate blocks: nonzero beta <= d componentwise.
    std::vector<DigitVector> candidates;
    DigitVector cur{d.p, std::vector<std::uint64_t>(d.d.size(), 0)};
    std::function<void(std::size_t)> gen = [&](std::size_t i) {
        if (i == d.d.size()) {
            if (!cur.is_zero()) {
                candidates.push_back(cur);
            }
            return;
        }
        for (std::uint64_t x = 0; x <= d.d[i]; ++x) {
            cur.d[i] = x;
            gen(i + 1);
        }
    };
    gen(0);

    std::vector<VectorPartition> out;
    VectorPartition partial;
    std::vector<std::uint64_t> rest = d.d;
    std::function<void(std::size_t)> rec = [&](std::size_t ci) {
        bool done = std::all_of(rest.begin(), rest.end(), [](auto x) { return x == 0; });
        if (done) {
            out.push_back(partial);
            return;
        }
        if (ci == candidates.size()) {
            return;
        }
        const auto &beta = candidates[ci];
        // Largest multiplicity of beta that fits in what remains.
        std::uint64_t max_mult = std::numeric_limits<std::uint64_t>::max();
        for (std::size_t i = 0; i < rest.size(); ++i) {
            if (beta.d[i] > 0) {
                max_mult = std::min(max_mult, rest[i] / beta.d[i]);
            }
        }
        for (std::uint64_t m = max_mult;; --m) {
            if (m > 0) {
                for (std::size_t i = 0; i < rest.size(); ++i) {
                    rest[i] -= m * beta.d[i];
                }
                partial.blocks.emplace_back(beta, m);
            }
            rec(ci + 1);
            if (m > 0) {
                partial.blocks.pop_back();
                for (std::size_t i = 0; i < rest.size(); ++i) {
                    rest[i] += m * beta.d[i];
                }
            }
            if (m == 0) {
                break;
            }
        }
    };
    rec(0);
    return out;
}

// ---------------------------------------------------------------------------
// Block series mod p

namespace detail {

inline void require_table_through(const CoefficientTable &table, std::uint64_t k, const char *op)
{
    if (table.max_k() < k) {
        throw usage_error(std::string(op) + " needs the table through k = " + std::to_string(k) + ", have " +
                          std::to_string(table.max_k()));
    }
}

/// sum_{j=0}^{top} a_{offset+j}/j! y^j mod p as a series of order `order`.
inline ResidueSeries block_series(const CoefficientTable &table, std::uint64_t offset, std::uint64_t top,
                                  std::uint64_t order)
{
    const auto p = table.params().p;
    std::vector<Residue> c(order + 1, Residue(0, p));
    for (std::uint64_t j = 0; j <= top && j <= order; ++j) {
        c[j] = mod_p_reduce(table.a(offset + j), p) * mod_p_reduce(factorial(j), p).inverse();
    }
    return ResidueSeries(std::move(c));
}

} // namespace detail

/// F_a(y) = sum_{j<=a} a_j/j! y^j mod p.
inline ResidueSeries first_block_series(const CoefficientTable &table, std::uint64_t a)
{
    detail::require_table_through(table, a, "first_block_series");
    return detail::block_series(table, 0, a, a);
}

/// H_beta(y) = sum_{j<=a} a_{N(beta)+j}/j! y^j mod p.
inline ResidueSeries block_series(const CoefficientTable &table, const DigitVector &beta, std::uint64_t a)
{
    detail::require_table_through(table, beta.numeric_value() + a, "block_series");
    return detail::block_series(table, beta.numeric_value(), a, a);
}

/// H~_d(y): H_d without its top coefficient y^a.
inline ResidueSeries truncated_block_series(const CoefficientTable &table, const DigitVector &d, std::uint64_t a)
{
    detail::require_table_through(table, d.numeric_value() + a - 1, "truncated_block_series");
    return detail::block_series(table, d.numeric_value(), a - 1, a);
}

/// Right-hand side of the vector-partition expansion of B_k[x^k] mod p at
/// k = N(d) + a: a! [y^a] of H~_d/F_a plus, over proper partitions Pi of d,
/// (-1)^{R-1} (R-1)! d!/prod(r_beta! (beta!)^{r_beta}) prod (H_beta/F_a)^{r_beta}.
inline Residue vector_b_expansion(const CoefficientTable &table, const DigitVector &d, std::uint64_t a)
{
    const auto p = table.params().p;
    if (a < 1 || a > p - 1) {
        throw usage_error("vector_b_expansion needs 1 <= a <= p-1");
    }
    if (d.p != p) {
        throw usage_error("digit vector base does not match the table");
    }
    detail::require_table_through(table, d.numeric_value() + a, "vector_b_expansion");

    const auto inv_f = ps_inverse(first_block_series(table, a));
    auto total = ps_mul(truncated_block_series(table, d, a), inv_f);

    for (const auto &part : enumerate_vector_partitions(d)) {
        if (part.blocks.size() == 1 && part.blocks[0].second == 1) {
            continue; // the one-block partition (d)
        }
        const auto blocks = part.block_count();
        BigInt denom = 1;
        for (const auto &[beta, mult] : part.blocks) {
            denom *= factorial(mult) * ipow(beta.factorial(), mult);
        }
        BigRational scalar = make_rational(factorial(blocks - 1) * d.factorial(), denom);
        if ((blocks - 1) % 2 == 1) {
            scalar = -scalar;
        }
        auto product = ResidueSeries::constant(mod_p_reduce(scalar, p), a);
        for (const auto &[beta, mult] : part.blocks) {
            auto ratio = ps_mul(block_series(table, beta, a), inv_f);
            product = ps_mul(product, ps_pow(ratio, mult));
        }
        total = total + product;
    }
    return mod_p_reduce(factorial(a), p) * total[a];
}

/// The one-variable block formula (-D)^{|beta|} F_a(y) mod p.
inline ResidueSeries predicted_block_series(const CoefficientTable &table, std::uint64_t weight, std::uint64_t a)
{
    auto f = ps_apply_d(first_block_series(table, a), weight);
    return weight % 2 == 1 ? f.scaled(Residue(-1, table.params().p)) : f;
}

// ---------------------------------------------------------------------------
// Series identities

/// [y^m] (sum_{i<m} y^i/(p^i i!))^q against p^m/m! - q/(p^m m!), exactly.
inline CheckReport truncated_exp_identity(std::uint64_t p, std::uint64_t m)
{
    require_odd_prime(p);
    if (m < 1) {
        throw usage_error("truncated_exp_identity needs m >= 1");
    }
    const auto q = p * p;
    const BigInt pb(static_cast<unsigned long>(p));
    std::vector<BigRational> c(m + 1, BigRational(0));
    for (std::uint64_t i = 0; i < m; ++i) {
        c[i] = make_rational(BigInt(1), ipow(pb, i) * factorial(i));
    }
    const auto lhs = ps_pow(RationalSeries(std::move(c)), q)[m];
    const BigRational rhs = make_rational(ipow(pb, m), factorial(m)) -
                            make_rational(BigInt(static_cast<unsigned long>(q)), ipow(pb, m) * factorial(m));
    CheckReport rep;
    rep.name = "truncated_exp";
    rep.p = p;
    rep.range = "m=" + std::to_string(m);
    rep.expect_equal(m, rhs.get_str(), lhs.get_str());
    return rep;
}

/// Solves U = x e^{-U} by fixed-point iteration (each pass fixes one more
/// coefficient) and compares [x^m]U with (-m)^{m-1}/m! for 1 <= m <= order.
inline CheckReport tree_function_check(std::uint64_t order)
{
    if (order < 1) {
        throw usage_error("tree_function_check needs order >= 1");
    }
    auto u = RationalSeries::zero(order);
    for (std::uint64_t pass = 0; pass < order; ++pass) {
        auto e = ps_exp(u.scaled(BigRational(-1)));
        u = ps_shift(e);
    }
    CheckReport rep;
    rep.name = "tree_function";
    rep.range = "m=1.." + std::to_string(order);
    for (std::uint64_t m = 1; m <= order; ++m) {
        BigInt num = ipow(BigInt(static_cast<unsigned long>(m)), m - 1);
        if ((m - 1) % 2 == 1) {
            num = -num;
        }
        rep.expect_equal(m, make_rational(num, factorial(m)).get_str(), u[m].get_str());
    }
    return rep;
}

namespace detail {

/// All exponent vectors of the given length with total degree in [1, max_total].
inline std::vector<std::vector<std::uint64_t>> exponent_vectors(std::size_t length, std::uint64_t max_total)
{
    std::vector<std::vector<std::uint64_t>> out;
    std::vector<std::uint64_t> cur(length, 0);
    std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t i, std::uint64_t used) {
        if (i == length) {
            if (used > 0) {
                out.push_back(cur);
            }
            return;
        }
        for (std::uint64_t x = 0; used + x <= max_total; ++x) {
            cur[i] = x;
            rec(i + 1, used + x);
        }
        cur[i] = 0;
    };
    rec(0, 0);
    return out;
}

} // namespace detail

/// a! [y^a] K_d(U) from the multivariate logarithm of
/// M(t) = 1 + sum_beta U_beta(y) t^beta/beta!, U_beta = (-1)^{|beta|} D^{|beta|}F_a/F_a,
/// against (-1)^{s+1} a^{s+1} a_{a-1} mod p.
inline CheckReport cumulant_collapse_check(const CoefficientTable &table, std::uint64_t a, const DigitVector &d)
{
    const auto p = table.params().p;
    const auto s = d.weight();
    if (table.params().r != 0) {
        throw usage_error("cumulant_collapse_check applies to r = 0 tables");
    }
    if (a < 1 || a > p - 1 || s == 0 || s >= p) {
        throw usage_error("cumulant_collapse_check needs 1 <= a <= p-1 and 1 <= |d| < p");
    }
    detail::require_table_through(table, a, "cumulant_collapse_check");

    const auto f = first_block_series(table, a);
    const auto inv_f = ps_inverse(f);
    const auto nvars = d.d.size();
    MVPolynomial m(p, nvars, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(a));
    MVPolynomial::Exponents e(nvars + 1, 0);
    m.add_term(e, Residue(1, p));
    for (const auto &beta : detail::exponent_vectors(nvars, s)) {
        std::uint64_t w = 0;
        BigInt beta_fact = 1;
        for (auto x : beta) {
            w += x;
            beta_fact *= factorial(x);
        }
        auto u = ps_mul(ps_apply_d(f, w), inv_f);
        auto scale = Residue(w % 2 == 1 ? -1 : 1, p) * mod_p_reduce(beta_fact, p).inverse();
        for (std::size_t i = 0; i < nvars; ++i) {
            e[i] = static_cast<std::uint16_t>(beta[i]);
        }
        for (std::uint64_t j = 0; j <= a; ++j) {
            e[nvars] = static_cast<std::uint16_t>(j);
            m.add_term(e, u[j] * scale);
        }
    }
    const auto log_m = mv_log(m);
    for (std::size_t i = 0; i < nvars; ++i) {
        e[i] = static_cast<std::uint16_t>(d.d[i]);
    }
    e[nvars] = static_cast<std::uint16_t>(a);
    const auto actual = log_m.coeff(e) * mod_p_reduce(d.factorial(), p) * mod_p_reduce(factorial(a), p);
    const auto expected = sign_residue(static_cast<std::int64_t>(s + 1), p) *
                          Residue(static_cast<std::int64_t>(a), p).pow(s + 1) * mod_p_reduce(table.a(a - 1), p);

    CheckReport rep;
    rep.name = "cumulant_collapse";
    rep.p = p;
    rep.range = "a=" + std::to_string(a) + " d=" + d.str();
    rep.expect_equal(d.numeric_value() + a, std::to_string(expected.value), std::to_string(actual.value),
                     "a=" + std::to_string(a) + " d=" + d.str());
    return rep;
}

} // namespace boettcher
