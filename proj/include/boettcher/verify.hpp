#pragma once

// Checkers for the congruences and valuation formulas. Each returns a
// CheckReport with one witness per index of its declared range.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boettcher/combinat.hpp>
#include <boettcher/errors.hpp>
#include <boettcher/padic.hpp>
#include <boettcher/report.hpp>
#include <boettcher/series.hpp>
#include <boettcher/solver.hpp>

namespace boettcher {

namespace detail {

inline std::string res_str(const Residue &x)
{
    return std::to_string(x.value) + " mod " + std::to_string(x.modulus);
}

/// Numerator * denominator^{-1} mod p^t for a rational with p-free denominator.
inline BigInt mod_prime_power(const BigRational &x, std::uint64_t p, std::uint64_t t)
{
    const BigInt m = ipow(BigInt(static_cast<unsigned long>(p)), t);
    BigInt den(x.get_den());
    BigInt inv;
    if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t()) == 0) {
        throw integrality_error("denominator of " + x.get_str() + " is divisible by " + std::to_string(p));
    }
    BigInt out = BigInt(x.get_num()) * inv;
    mpz_mod(out.get_mpz_t(), out.get_mpz_t(), m.get_mpz_t());
    return out;
}

inline std::string prime_power_str(const BigInt &v, std::uint64_t p, std::uint64_t t)
{
    return v.get_str() + " mod " + std::to_string(p) + "^" + std::to_string(t);
}

/// Runs `actual` and records a witness; data-dependent arithmetic failures
/// (non-integral values, valuation mismatches) become failing witnesses.
inline void witness(CheckReport &rep, std::uint64_t index, const std::string &expected,
                    const std::function<std::string()> &actual, std::string tag = {})
{
    try {
        rep.expect_equal(index, expected, actual(), std::move(tag));
    } catch (const std::domain_error &e) {
        rep.add(index, expected, std::string("error: ") + e.what(), false, std::move(tag));
    }
}

inline CheckReport new_report(const std::string &name, const CoefficientTable &table, std::string range)
{
    CheckReport rep;
    rep.name = name;
    rep.p = table.params().p;
    rep.r = table.params().r;
    rep.range = std::move(range);
    return rep;
}

inline void require_special_fiber(const CoefficientTable &table, const char *check)
{
    if (table.params().r != 0) {
        throw usage_error(std::string(check) + " applies to r = 0 only");
    }
}

inline void require_higher_fiber(const CoefficientTable &table, const char *check)
{
    if (table.params().r == 0) {
        throw usage_error(std::string(check) + " applies to r >= 1 only");
    }
}

inline void require_max_k(const CoefficientTable &table, std::uint64_t k, const char *check)
{
    if (table.max_k() < k) {
        throw usage_error(std::string(check) + " needs the table through k = " + std::to_string(k));
    }
}

/// Largest n with p^n <= k.
inline std::uint64_t top_level(std::uint64_t p, std::uint64_t k)
{
    std::uint64_t n = 0;
    for (std::uint64_t pw = p; pw <= k; pw *= p) {
        ++n;
    }
    return n;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Any r

/// a_0 = 1 and a_1 = -p^r.
inline CheckReport check_normalization(const CoefficientTable &table)
{
    const auto &params = table.params();
    detail::require_max_k(table, 1, "normalization");
    auto rep = detail::new_report("normalization", table, "k=0..1");
    rep.expect_equal(0, "1", table.a(0).get_str());
    BigInt expected = -ipow(BigInt(static_cast<unsigned long>(params.p)), params.r);
    rep.expect_equal(1, expected.get_str(), table.a(1).get_str());
    return rep;
}

/// A_k[x^k] = 0 mod p; on r = 0 also C_k[x^k] = a a_{k-1} mod p for
/// a = k mod p != 0; C_k[x^k] = 0 mod p when p | k (all r). Uses the direct
/// decomposition, not the solver's recorded terms.
inline CheckReport check_A_C_lemmas(const CoefficientTable &table, std::uint64_t k_max)
{
    const auto p = table.params().p;
    const bool special = table.params().r == 0;
    k_max = std::min(k_max, table.max_k());
    auto rep = detail::new_report("ac_lemmas", table, "k=1.." + std::to_string(k_max));
    for (std::uint64_t k = 1; k <= k_max; ++k) {
        const auto d = abc_decompose(table, k);
        detail::witness(rep, k, detail::res_str(Residue(0, p)),
                        [&] { return detail::res_str(mod_p_reduce(d.A, p)); }, "A");
        if (k % p == 0) {
            detail::witness(rep, k, detail::res_str(Residue(0, p)),
                            [&] { return detail::res_str(mod_p_reduce(d.C, p)); }, "C_div");
        } else if (special) {
            std::string expected;
            try {
                expected = detail::res_str(Residue(static_cast<std::int64_t>(k % p), p) *
                                           mod_p_reduce(table.a(k - 1), p));
            } catch (const std::domain_error &e) {
                expected = std::string("error: ") + e.what();
            }
            detail::witness(rep, k, expected, [&] { return detail::res_str(mod_p_reduce(d.C, p)); }, "C");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Special fiber r = 0

/// a_n = (-1)^n (n+1)^{n-1} mod p for 0 <= n <= p-1.
inline CheckReport check_first_block(const CoefficientTable &table)
{
    detail::require_special_fiber(table, "first_block");
    const auto p = table.params().p;
    detail::require_max_k(table, p - 1, "first_block");
    auto rep = detail::new_report("first_block", table, "n=0.." + std::to_string(p - 1));
    for (std::uint64_t n = 0; n < p; ++n) {
        Residue expected = n == 0 ? Residue(1, p)
                                  : sign_residue(static_cast<std::int64_t>(n), p) *
                                        Residue(static_cast<std::int64_t>(n + 1), p).pow(n - 1);
        detail::witness(rep, n, detail::res_str(expected),
                        [&] { return detail::res_str(mod_p_reduce(table.a(n), p)); });
    }
    return rep;
}

/// log F_{p-1}(y) = -y F_{p-1}(y) mod (p, y^p), coefficientwise.
inline CheckReport check_log_first_block(const CoefficientTable &table)
{
    detail::require_special_fiber(table, "log_first_block");
    const auto p = table.params().p;
    detail::require_max_k(table, p - 1, "log_first_block");
    auto rep = detail::new_report("log_first_block", table, "y^0..y^" + std::to_string(p - 1));
    try {
        const auto f = first_block_series(table, p - 1);
        const auto lhs = ps_log(f);
        const auto rhs = ps_shift(f).scaled(Residue(-1, p));
        for (std::uint64_t j = 0; j < p; ++j) {
            rep.expect_equal(j, detail::res_str(rhs[j]), detail::res_str(lhs[j]));
        }
    } catch (const std::domain_error &e) {
        rep.add(0, "log F defined", std::string("error: ") + e.what(), false);
    }
    return rep;
}

/// Both digit-sum congruences for 1 <= k <= K, with a = k mod p and
/// s = S_p(k) - a:
///   eq1: a_k = (-1)^s (a+1)^s a_a,   eq2: a_k = (-1)^{a+s} (a+1)^{a+s-1}.
inline CheckReport check_digit_sum(const CoefficientTable &table)
{
    detail::require_special_fiber(table, "digit_sum");
    const auto p = table.params().p;
    const auto k_max = table.max_k();
    auto rep = detail::new_report("digit_sum", table, "k=1.." + std::to_string(k_max));
    for (std::uint64_t k = 1; k <= k_max; ++k) {
        const auto a = k % p;
        const auto s = digit_sum(k, p) - a;
        const Residue a1(static_cast<std::int64_t>(a + 1), p);
        auto actual = [&] { return detail::res_str(mod_p_reduce(table.a(k), p)); };
        std::string eq1;
        try {
            eq1 = detail::res_str(sign_residue(static_cast<std::int64_t>(s), p) * a1.pow(s) *
                                  mod_p_reduce(table.a(a), p));
        } catch (const std::domain_error &e) {
            eq1 = std::string("error: ") + e.what();
        }
        detail::witness(rep, k, eq1, actual, "eq1");
        const Residue eq2 = sign_residue(static_cast<std::int64_t>(a + s), p) * a1.pow(a + s - 1);
        detail::witness(rep, k, detail::res_str(eq2), actual, "eq2");
    }
    return rep;
}

/// a_{pm} = (-1)^m, a_{pm-1} = 0, a_{pm-2} = -1 mod p for all pm <= K.
inline CheckReport check_conj25(const CoefficientTable &table)
{
    detail::require_special_fiber(table, "conj25");
    const auto p = table.params().p;
    const auto m_max = table.max_k() / p;
    auto rep = detail::new_report("conj25", table, "m=1.." + std::to_string(m_max));
    for (std::uint64_t m = 1; m <= m_max; ++m) {
        const auto k = p * m;
        auto at = [&](std::uint64_t i) { return [&table, i, p] { return detail::res_str(mod_p_reduce(table.a(i), p)); }; };
        detail::witness(rep, k, detail::res_str(sign_residue(static_cast<std::int64_t>(m), p)), at(k), "pm");
        detail::witness(rep, k - 1, detail::res_str(Residue(0, p)), at(k - 1), "pm-1");
        detail::witness(rep, k - 2, detail::res_str(Residue(-1, p)), at(k - 2), "pm-2");
    }
    return rep;
}

/// Unit-coefficient B-monomials at p | k <= k_max fall into the exceptional
/// class (only at k = p) or the all-divisible class, and nowhere else.
inline CheckReport check_b_survivors(std::uint64_t p, std::uint64_t k_max)
{
    CheckReport rep;
    rep.name = "b_survivors";
    rep.p = p;
    rep.range = "p|k, k=" + std::to_string(p) + ".." + std::to_string(k_max);
    std::uint64_t units = 0;
    for (std::uint64_t k = p; k <= k_max; k += p) {
        const auto c = classify_b_survivors(p, k);
        units += c.unit_monomials;
        std::string expected = "exceptional=" + std::to_string(k == p ? 1 : 0) + " unexplained=0";
        std::string actual = "exceptional=" + std::to_string(c.exceptional) +
                             " unexplained=" + std::to_string(c.unexplained.size());
        if (!c.unexplained.empty()) {
            actual += " first=" + c.unexplained.front().str();
        }
        rep.expect_equal(k, expected, actual);
    }
    rep.metrics["unit_monomials"] = std::to_string(units);
    return rep;
}

/// Longest digit-vector length L for which every vector of weight <= w plus
/// an offset <= top stays within the table.
inline std::size_t fitting_length(std::uint64_t p, std::uint64_t w, std::uint64_t top, std::uint64_t k_max)
{
    std::size_t len = 0;
    for (std::uint64_t place = p; w * place + top <= k_max; place *= p) {
        ++len;
    }
    return len;
}

/// The vector-partition expansion of B_k[x^k] against the recorded B term,
/// for every nonzero d of the given length with |d| <= max_weight and every
/// a in 1..p-1.
inline CheckReport check_vector_b(const CoefficientTable &table, std::size_t length, std::uint64_t max_weight)
{
    detail::require_special_fiber(table, "vector_b");
    const auto p = table.params().p;
    if (length == 0) {
        throw usage_error("vector_b: no digit vectors fit in the table");
    }
    auto rep = detail::new_report("vector_b", table,
                                  "len=" + std::to_string(length) + " |d|<=" + std::to_string(max_weight) + " a=1.." +
                                      std::to_string(p - 1));
    for (const auto &d : enumerate_digit_vectors(p, length, max_weight)) {
        for (std::uint64_t a = 1; a < p; ++a) {
            const auto k = d.numeric_value() + a;
            detail::require_max_k(table, k, "vector_b");
            detail::witness(
                rep, k, [&] {
                    try {
                        return detail::res_str(mod_p_reduce(table.terms(k).B, p));
                    } catch (const std::domain_error &e) {
                        return std::string("error: ") + e.what();
                    }
                }(),
                [&] { return detail::res_str(vector_b_expansion(table, d, a)); },
                "d=" + d.str() + " a=" + std::to_string(a));
        }
    }
    return rep;
}

/// Cumulant collapse over all nonzero d of the given length with
/// |d| <= max_weight (< p) and 1 <= a <= a_max (<= p-1).
inline CheckReport check_cumulant_collapse(const CoefficientTable &table, std::size_t length,
                                           std::uint64_t max_weight, std::uint64_t a_max)
{
    detail::require_special_fiber(table, "cumulant_collapse");
    const auto p = table.params().p;
    if (max_weight >= p || a_max >= p || a_max == 0 || length == 0) {
        throw usage_error("cumulant_collapse needs |d| < p, 1 <= a <= p-1");
    }
    auto rep = detail::new_report("cumulant_collapse", table,
                                  "len=" + std::to_string(length) + " |d|<=" + std::to_string(max_weight) + " a=1.." +
                                      std::to_string(a_max));
    for (const auto &d : enumerate_digit_vectors(p, length, max_weight)) {
        for (std::uint64_t a = 1; a <= a_max; ++a) {
            try {
                auto one = cumulant_collapse_check(table, a, d);
                rep.witnesses.insert(rep.witnesses.end(), one.witnesses.begin(), one.witnesses.end());
            } catch (const std::domain_error &e) {
                rep.add(d.numeric_value() + a, "", std::string("error: ") + e.what(), false,
                        "a=" + std::to_string(a) + " d=" + d.str());
            }
        }
    }
    return rep;
}

/// H_beta(y) = (-D)^{|beta|} F_{p-1}(y) mod p coefficientwise for every
/// nonzero beta of the given length with |beta| <= max_weight.
inline CheckReport check_block_transfer(const CoefficientTable &table, std::size_t length, std::uint64_t max_weight)
{
    detail::require_special_fiber(table, "block_transfer");
    const auto p = table.params().p;
    if (length == 0) {
        throw usage_error("block_transfer: no digit vectors fit in the table");
    }
    auto rep = detail::new_report("block_transfer", table,
                                  "len=" + std::to_string(length) + " |beta|<=" + std::to_string(max_weight));
    for (const auto &beta : enumerate_digit_vectors(p, length, max_weight)) {
        detail::require_max_k(table, beta.numeric_value() + p - 1, "block_transfer");
        try {
            const auto h = block_series(table, beta, p - 1);
            const auto predicted = predicted_block_series(table, beta.weight(), p - 1);
            for (std::uint64_t j = 0; j < p; ++j) {
                rep.expect_equal(beta.numeric_value() + j, detail::res_str(predicted[j]), detail::res_str(h[j]),
                                 "beta=" + beta.str());
            }
        } catch (const std::domain_error &e) {
            rep.add(beta.numeric_value(), "", std::string("error: ") + e.what(), false, "beta=" + beta.str());
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Table-free identities

/// Truncated-exponential identity for 1 <= m <= m_max.
inline CheckReport check_truncated_exp(std::uint64_t p, std::uint64_t m_max)
{
    CheckReport rep;
    rep.name = "truncated_exp";
    rep.p = p;
    rep.range = "m=1.." + std::to_string(m_max);
    for (std::uint64_t m = 1; m <= m_max; ++m) {
        auto one = truncated_exp_identity(p, m);
        for (auto &w : one.witnesses) {
            w.expected = detail::abbreviate(w.expected);
            w.actual = detail::abbreviate(w.actual);
        }
        rep.witnesses.insert(rep.witnesses.end(), one.witnesses.begin(), one.witnesses.end());
    }
    return rep;
}

inline constexpr std::uint64_t alpha_gamma_guard = 400;

/// alpha_n = (p^n)!/(q (p^{n-2})!) has valuation (p+1)p^{n-2}-2 and unit 1;
/// gamma_n = (p^n)!/(p (p^{n-1})!^p) binom(p^2-1, p-1) = -1 mod p; the
/// multinomial (p^n)!/(p^{n-1})!^p has valuation 1; binom(p^2-1, p-1) = 1.
inline CheckReport check_alpha_gamma(std::uint64_t p, std::uint64_t n_max)
{
    require_odd_prime(p);
    if (n_max < 2) {
        throw usage_error("alpha_gamma needs n_max >= 2");
    }
    if (upow(p, n_max) > alpha_gamma_guard) {
        throw guard_exceeded("alpha_gamma refused for p^n = " + std::to_string(upow(p, n_max)) + " (limit " +
                             std::to_string(alpha_gamma_guard) + ")");
    }
    CheckReport rep;
    rep.name = "alpha_gamma";
    rep.p = p;
    rep.range = "n=2.." + std::to_string(n_max);
    const BigInt pb(static_cast<unsigned long>(p));
    const BigInt binom = binomial(p * p - 1, p - 1);
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        const auto pn = upow(p, n);
        const BigRational alpha = make_rational(factorial(pn), pb * pb * factorial(pn / (p * p)));
        const auto alpha_ord = static_cast<std::int64_t>((p + 1) * upow(p, n - 2)) - 2;
        rep.expect_equal(n, std::to_string(alpha_ord), ord_p(alpha, p).str(), "alpha_ord");
        detail::witness(rep, n, detail::res_str(Residue(1, p)),
                        [&] { return detail::res_str(unit_part_mod_p(alpha, p, alpha_ord)); }, "alpha_unit");

        const BigRational multinomial = make_rational(factorial(pn), ipow(factorial(pn / p), p));
        rep.expect_equal(n, "1", ord_p(multinomial, p).str(), "multinomial_ord");
        const BigRational gamma = multinomial / BigRational(pb) * BigRational(binom);
        detail::witness(rep, n, detail::res_str(Residue(-1, p)),
                        [&] { return detail::res_str(mod_p_reduce(gamma, p)); }, "gamma_unit");
    }
    rep.expect_equal(0, detail::res_str(Residue(1, p)), detail::res_str(mod_p_reduce(binom, p)), "binom");
    return rep;
}

// ---------------------------------------------------------------------------
// Higher fibers r >= 1

/// Pure-power valuations v_n = ord_p(a_{p^n}) as measured, and as predicted
/// by the two-branch recursion from v_0 = r, v_1 = pr alone.
struct VTable {
    FamilyParams params;
    std::vector<Valuation> v;
    std::vector<std::int64_t> predicted;
    /// Dominance at layer n >= 2 from the measured values: "A", "B" or "T".
    std::vector<std::string> dominance;
    std::vector<std::int64_t> A;
    std::vector<std::int64_t> B;

    std::uint64_t n_max() const { return v.size() - 1; }

    /// s = floor((r+1)/2).
    std::uint64_t s() const { return (params.r + 1) / 2; }
};

/// A_n = (p+1)p^{n-2} - 2 + v_{n-2} and B_n = p v_{n-1}.
inline std::pair<std::int64_t, std::int64_t> layer_candidates(std::uint64_t p, std::uint64_t n, std::int64_t v_n2,
                                                               std::int64_t v_n1)
{
    auto a = static_cast<std::int64_t>((p + 1) * upow(p, n - 2)) - 2 + v_n2;
    auto b = static_cast<std::int64_t>(p) * v_n1;
    return {a, b};
}

/// v_n by the branch rule alone: A-branch iff n is even and r >= n-1.
inline std::vector<std::int64_t> predicted_v_sequence(std::uint64_t p, std::uint64_t r, std::uint64_t n_max)
{
    std::vector<std::int64_t> v{static_cast<std::int64_t>(r), static_cast<std::int64_t>(p * r)};
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        auto [a, b] = layer_candidates(p, n, v[n - 2], v[n - 1]);
        v.push_back(n % 2 == 0 && r + 1 >= n ? a : b);
    }
    v.resize(n_max + 1);
    return v;
}

/// Builds the v-table for n <= n_max (p^{n_max} <= K) and checks measured
/// values against the initial values, min{A_n, B_n}, and the branch recursion.
inline std::pair<VTable, CheckReport> build_v_table(const CoefficientTable &table, std::uint64_t n_max)
{
    detail::require_higher_fiber(table, "v_table");
    const auto &params = table.params();
    const auto p = params.p;
    if (n_max < 1 || upow(p, n_max) > table.max_k()) {
        throw usage_error("v_table needs 1 <= n_max with p^n_max <= K");
    }
    VTable vt;
    vt.params = params;
    vt.predicted = predicted_v_sequence(p, params.r, n_max);
    for (std::uint64_t n = 0; n <= n_max; ++n) {
        vt.v.push_back(table.valuation(upow(p, n)));
    }
    auto rep = detail::new_report("v_table", table, "n=0.." + std::to_string(n_max));
    rep.expect_equal(0, std::to_string(params.r), vt.v[0].str(), "init");
    rep.expect_equal(1, std::to_string(p * params.r), vt.v[1].str(), "init");
    vt.dominance.assign(n_max + 1, "");
    vt.A.assign(n_max + 1, 0);
    vt.B.assign(n_max + 1, 0);
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        if (vt.v[n - 1].is_infinite() || vt.v[n - 2].is_infinite()) {
            rep.add(n, "finite v_" + std::to_string(n - 2) + ", v_" + std::to_string(n - 1), "inf", false, "min");
            continue;
        }
        auto [a, b] = layer_candidates(p, n, vt.v[n - 2].value(), vt.v[n - 1].value());
        vt.A[n] = a;
        vt.B[n] = b;
        vt.dominance[n] = a < b ? "A" : (b < a ? "B" : "T");
        rep.expect_equal(n, std::to_string(std::min(a, b)), vt.v[n].str(), "min");
        rep.expect_equal(n, std::to_string(vt.predicted[n]), vt.v[n].str(), "branch");
    }
    std::string seq;
    for (const auto &x : vt.v) {
        seq += (seq.empty() ? "" : ",") + x.str();
    }
    rep.metrics["v_sequence"] = seq;
    return {std::move(vt), std::move(rep)};
}

/// Dominance pattern: odd layers B; even layer 2j is A iff r >= 2j-1; all
/// layers n >= 2s+1 are B; A_{2j+1} - B_{2j+1} = 2p-2 after an A-layer 2j.
inline CheckReport check_branch_pattern(const VTable &vt)
{
    CheckReport rep;
    rep.name = "branch_pattern";
    rep.p = vt.params.p;
    rep.r = vt.params.r;
    rep.range = "n=2.." + std::to_string(vt.n_max());
    const auto r = vt.params.r;
    for (std::uint64_t n = 2; n <= vt.n_max(); ++n) {
        const auto &tag = vt.dominance[n];
        if (n % 2 == 1) {
            rep.expect_equal(n, "B", tag, "odd");
            if (vt.dominance[n - 1] == "A") {
                rep.expect_equal(n, std::to_string(2 * vt.params.p - 2), std::to_string(vt.A[n] - vt.B[n]), "gap");
            }
        } else {
            rep.expect_equal(n, r + 1 >= n ? "A" : "B", tag, "even");
        }
        if (n >= 2 * vt.s() + 1) {
            rep.expect_equal(n, "B", tag, "stable");
        }
    }
    return rep;
}

/// p^{-v_n} a_{p^n} = -1 mod p, with v_n from the branch recursion.
inline CheckReport check_pure_units(const CoefficientTable &table, const VTable &vt)
{
    detail::require_higher_fiber(table, "pure_units");
    const auto p = table.params().p;
    auto rep = detail::new_report("pure_units", table, "n=0.." + std::to_string(vt.n_max()));
    for (std::uint64_t n = 0; n <= vt.n_max(); ++n) {
        const auto k = upow(p, n);
        detail::witness(rep, k, detail::res_str(Residue(-1, p)),
                        [&] { return detail::res_str(unit_part_mod_p(table.a(k), p, vt.predicted[n])); });
    }
    return rep;
}

/// Lambda_r(k) = sum k_i v_i over base-p digits, with the predicted v_i.
class DigitWeight {
public:
    explicit DigitWeight(const VTable &vt) : p_(vt.params.p), v_(vt.predicted) {}
    DigitWeight(std::uint64_t p, std::vector<std::int64_t> v) : p_(p), v_(std::move(v)) {}

    std::int64_t operator()(std::uint64_t k) const
    {
        const auto ds = digits(k, p_);
        if (ds.digits.size() > v_.size()) {
            throw usage_error("digit weight of " + std::to_string(k) + " needs v beyond level " +
                              std::to_string(v_.size() - 1));
        }
        std::int64_t s = 0;
        for (std::size_t i = 0; i < ds.digits.size(); ++i) {
            s += static_cast<std::int64_t>(ds.digits[i]) * v_[i];
        }
        return s;
    }

    /// Digit monomial prod a_{p^i}^{k_i} on a table.
    BigRational monomial(const CoefficientTable &table, std::uint64_t k) const
    {
        const auto ds = digits(k, p_);
        BigRational m = 1;
        std::uint64_t pw = 1;
        for (auto d : ds.digits) {
            for (std::uint64_t j = 0; j < d; ++j) {
                m *= table.a(pw);
            }
            pw *= p_;
        }
        return m;
    }

    std::uint64_t levels() const { return v_.size(); }

private:
    std::uint64_t p_;
    std::vector<std::int64_t> v_;
};

/// Slope (1 - p^{-r})/(p-1).
inline BigRational stable_slope(std::uint64_t p, std::uint64_t r)
{
    const BigInt pr = ipow(BigInt(static_cast<unsigned long>(p)), r);
    return make_rational(pr - 1, pr * BigInt(static_cast<unsigned long>(p - 1)));
}

/// Slope equality v_n = slope p^n for covered n >= 2s, and for every p | k <= K
/// the deviation ord_p(a_k) - slope k lies within the range of deviations over
/// indices below p^{2s}. The bound and its argmax are recorded as metrics.
inline CheckReport check_pure_slope_and_27a(const CoefficientTable &table, const VTable &vt)
{
    detail::require_higher_fiber(table, "slope_27a");
    const auto p = table.params().p;
    const auto r = table.params().r;
    const auto two_s = 2 * vt.s();
    const auto low = upow(p, two_s);
    if (two_s > vt.n_max() || low > table.max_k()) {
        throw usage_error("slope_27a needs p^{2s} = " + std::to_string(low) + " within the table");
    }
    const auto slope = stable_slope(p, r);
    auto rep = detail::new_report("slope_27a", table, "n=" + std::to_string(two_s) + ".." + std::to_string(vt.n_max()) +
                                                          ", p|k<=" + std::to_string(table.max_k()));
    for (std::uint64_t n = two_s; n <= vt.n_max(); ++n) {
        BigRational expected = slope * BigRational(ipow(BigInt(static_cast<unsigned long>(p)), n));
        rep.expect_equal(upow(p, n), expected.get_str(), vt.v[n].str(), "slope");
    }

    auto deviation = [&](std::uint64_t k) -> std::optional<BigRational> {
        if (k == 0) {
            return BigRational(0);
        }
        const auto &v = table.valuation(k);
        if (v.is_infinite()) {
            return std::nullopt;
        }
        return BigRational(static_cast<long>(v.value())) - slope * BigRational(static_cast<unsigned long>(k));
    };

    // Range of deviations below level 2s (j = 0 included: the empty low part).
    BigRational lo = 0;
    BigRational hi = 0;
    for (std::uint64_t j = p; j < low; j += p) {
        auto d = deviation(j);
        if (!d) {
            rep.add(j, "finite ord", "inf", false, "27a");
            continue;
        }
        lo = std::min(lo, *d);
        hi = std::max(hi, *d);
    }
    BigRational max_abs = 0;
    std::uint64_t argmax = 0;
    for (std::uint64_t k = p; k <= table.max_k(); k += p) {
        auto d = deviation(k);
        if (!d) {
            rep.add(k, "finite ord", "inf", false, "27a");
            continue;
        }
        BigRational mag = abs(*d);
        if (mag > max_abs) {
            max_abs = mag;
            argmax = k;
        }
        bool ok = lo <= *d && *d <= hi;
        rep.add(k, "[" + lo.get_str() + "," + hi.get_str() + "]", d->get_str(), ok, "27a");
    }
    rep.metrics["deviation_low"] = lo.get_str();
    rep.metrics["deviation_high"] = hi.get_str();
    rep.metrics["max_abs_deviation"] = max_abs.get_str();
    rep.metrics["argmax"] = std::to_string(argmax);
    rep.metrics["slope"] = slope.get_str();
    return rep;
}

/// ord_p(a_k) >= Lambda_r(k) for 1 <= k <= K; equality cases are tagged.
inline CheckReport check_lambda_lower_bound(const CoefficientTable &table, const VTable &vt)
{
    detail::require_higher_fiber(table, "lambda_bound");
    const DigitWeight lambda(vt);
    auto rep = detail::new_report("lambda_bound", table, "k=1.." + std::to_string(table.max_k()));
    std::uint64_t equalities = 0;
    for (std::uint64_t k = 1; k <= table.max_k(); ++k) {
        const auto bound = lambda(k);
        const auto &v = table.valuation(k);
        const bool ok = v >= Valuation(bound);
        const bool eq = v == Valuation(bound);
        equalities += eq ? 1 : 0;
        rep.add(k, ">=" + std::to_string(bound), v.str(), ok, eq ? "equality" : "strict");
    }
    rep.metrics["equalities"] = std::to_string(equalities);
    return rep;
}

/// For k = pm <= K not a power of p: a_k = prod a_{p^i}^{k_i} mod p^{Lambda+1}
/// ("monomial") and p^{-Lambda} a_k = (-1)^{S_p(m)} mod p ("sign").
inline CheckReport check_leading_term(const CoefficientTable &table, const VTable &vt)
{
    detail::require_higher_fiber(table, "leading_term");
    const auto p = table.params().p;
    const DigitWeight lambda(vt);
    auto rep = detail::new_report("leading_term", table, "p|k<=" + std::to_string(table.max_k()) + ", k != p^n");
    for (std::uint64_t k = p; k <= table.max_k(); k += p) {
        if (is_power_of(k, p)) {
            continue;
        }
        const auto l = lambda(k);
        const auto t = static_cast<std::uint64_t>(l) + 1;
        std::string expected;
        try {
            expected = detail::prime_power_str(detail::mod_prime_power(lambda.monomial(table, k), p, t), p, t);
        } catch (const std::domain_error &e) {
            expected = std::string("error: ") + e.what();
        }
        detail::witness(
            rep, k, expected,
            [&] { return detail::prime_power_str(detail::mod_prime_power(table.a(k), p, t), p, t); }, "monomial");
        const auto sign = sign_residue(static_cast<std::int64_t>(digit_sum(k / p, p)), p);
        detail::witness(rep, k, detail::res_str(sign),
                        [&] { return detail::res_str(unit_part_mod_p(table.a(k), p, l)); }, "sign");
    }
    return rep;
}

/// Lambda_r(m+n) <= Lambda_r(m) + Lambda_r(n). For p = 3 every split of every
/// N <= p^{n_max} is checked and one witness per N records the tightest split;
/// otherwise `samples` pairs are drawn from a fixed-seed generator.
inline CheckReport check_subadditivity(const VTable &vt, std::uint64_t samples, std::uint64_t seed = 20240601)
{
    const auto p = vt.params.p;
    const DigitWeight lambda(vt);
    const auto top = upow(p, vt.n_max());
    CheckReport rep;
    rep.name = "subadditivity";
    rep.p = p;
    rep.r = vt.params.r;
    if (p == 3) {
        rep.range = "N=0.." + std::to_string(top) + " all splits";
        for (std::uint64_t total = 0; total <= top; ++total) {
            const auto lhs = lambda(total);
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            std::uint64_t best_m = 0;
            for (std::uint64_t m = 0; m <= total / 2; ++m) {
                auto rhs = lambda(m) + lambda(total - m);
                if (rhs < best) {
                    best = rhs;
                    best_m = m;
                }
            }
            rep.add(total, "<=" + std::to_string(best), std::to_string(lhs), lhs <= best,
                    "m=" + std::to_string(best_m));
        }
    } else {
        rep.range = std::to_string(samples) + " samples, m+n<=" + std::to_string(top);
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::uint64_t> dist(0, top);
        for (std::uint64_t i = 0; i < samples; ++i) {
            const auto total = dist(rng);
            const auto m = std::uniform_int_distribution<std::uint64_t>(0, total)(rng);
            const auto lhs = lambda(total);
            const auto rhs = lambda(m) + lambda(total - m);
            rep.add(total, "<=" + std::to_string(rhs), std::to_string(lhs), lhs <= rhs,
                    "m=" + std::to_string(m) + " n=" + std::to_string(total - m));
        }
    }
    return rep;
}

} // namespace boettcher
