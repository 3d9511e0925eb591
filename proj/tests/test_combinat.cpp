#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include <boettcher/combinat.hpp>

using namespace boettcher;

namespace {

// Partitions of n into parts <= max_part with at most max_count parts, by DP.
std::uint64_t count_partitions(std::uint64_t n, std::uint64_t max_part, std::uint64_t max_count)
{
    // ways[c][s]: partitions of s with exactly c parts, parts <= current bound.
    std::vector<std::vector<std::uint64_t>> ways(max_count + 1, std::vector<std::uint64_t>(n + 1, 0));
    ways[0][0] = 1;
    for (std::uint64_t part = 1; part <= max_part; ++part) {
        for (std::uint64_t c = 1; c <= max_count; ++c) {
            for (std::uint64_t s = part; s <= n; ++s) {
                ways[c][s] += ways[c - 1][s - part];
            }
        }
    }
    std::uint64_t total = 0;
    for (std::uint64_t c = 0; c <= max_count; ++c) {
        total += ways[c][n];
    }
    return total;
}

DigitVector dv(std::uint64_t p, std::vector<std::uint64_t> d) { return DigitVector{p, std::move(d)}; }

} // namespace

TEST(MultiIndex, Basics)
{
    const MultiIndex e({{0, 7}, {1, 2}, {4, 0}});
    EXPECT_EQ(e.entries().size(), 2U);
    EXPECT_EQ(e.sigma(), 9U);
    EXPECT_EQ(e.weight(), 2U);
    EXPECT_EQ(e.exponent(4), 0U);
    EXPECT_EQ(e.exponent_digit_sum(3), 5U); // 7 = 21_3, 2 = 2_3
    EXPECT_EQ(e.index_digit_sum(3), 2U);
}

TEST(BMonomials, SmallK)
{
    EXPECT_TRUE(enumerate_b_monomials(3, 1).empty());
    const auto k2 = enumerate_b_monomials(3, 2);
    ASSERT_EQ(k2.size(), 1U);
    EXPECT_EQ(k2[0], MultiIndex({{0, 7}, {1, 2}}));
    const auto k3 = enumerate_b_monomials(3, 3);
    ASSERT_EQ(k3.size(), 2U);
    std::set<std::string> got{k3[0].str(), k3[1].str()};
    EXPECT_TRUE(got.count(MultiIndex({{0, 6}, {1, 3}}).str()));
    EXPECT_TRUE(got.count(MultiIndex({{0, 7}, {1, 1}, {2, 1}}).str()));
}

TEST(BMonomials, CountsMatchPartitionOracle)
{
    for (std::uint64_t p : {3, 5}) {
        const auto q = p * p;
        for (std::uint64_t k = 1; k <= 30; ++k) {
            const auto b = enumerate_b_monomials(p, k);
            EXPECT_EQ(b.size(), count_partitions(k, k - 1, q)) << "p=" << p << " k=" << k;
            std::set<std::string> distinct;
            for (const auto &e : b) {
                EXPECT_EQ(e.sigma(), q);
                EXPECT_EQ(e.weight(), k);
                EXPECT_LT(e.entries().rbegin()->first, k);
                distinct.insert(e.str());
            }
            EXPECT_EQ(distinct.size(), b.size());

            const auto c = enumerate_c_monomials(p, k);
            EXPECT_EQ(c.size(), count_partitions(k - 1, k, q + 1)) << "p=" << p << " k=" << k;
            for (const auto &e : c) {
                EXPECT_EQ(e.sigma(), q + 1);
                EXPECT_EQ(e.weight(), k - 1);
            }
        }
    }
}

TEST(BMonomials, Guard)
{
    EXPECT_THROW(enumerate_b_monomials(5, 41), guard_exceeded);
    EXPECT_THROW(enumerate_c_monomials(7, 41), guard_exceeded);
    EXPECT_THROW(classify_b_survivors(5, 45), guard_exceeded);
    EXPECT_NO_THROW(enumerate_b_monomials(5, 40));
    EXPECT_THROW(enumerate_b_monomials(3, 0), usage_error);
}

TEST(BCoefficient, ExceptionalAndPurePattern)
{
    for (std::uint64_t p : {3, 5, 7}) {
        const auto rec = b_coefficient(exceptional_monomial(p), p, p);
        EXPECT_EQ(rec.valuation, Valuation(0));
        EXPECT_EQ(mod_p_reduce(rec.coefficient, p), Residue(-1, p));

        const auto q = p * p;
        const auto pure = b_coefficient(MultiIndex({{1, q}}), p, q);
        EXPECT_EQ(pure.carry_c, p + 1);
        EXPECT_EQ(pure.carry_d, 0U);
        EXPECT_EQ(pure.valuation, Valuation(static_cast<std::int64_t>(p - 1)));
    }
    EXPECT_THROW(b_coefficient(MultiIndex({{0, 8}, {1, 1}}), 3, 2), usage_error);
}

TEST(BCoefficient, ValuationFromCarryDefects)
{
    for (std::uint64_t k = 1; k <= 20; ++k) {
        for (const auto &e : enumerate_b_monomials(3, k)) {
            const auto rec = b_coefficient(e, 3, k);
            EXPECT_EQ(rec.valuation, ord_p(rec.coefficient, 3));
            EXPECT_EQ(rec.valuation.value(), static_cast<std::int64_t>(rec.carry_c + rec.carry_d) - 2);
        }
    }
}

TEST(Reassembly, BAndCSumToDirectComponents)
{
    for (std::uint64_t r : {0, 1}) {
        const auto t = solve_coefficients(FamilyParams::make(3, r), 15);
        for (std::uint64_t k = 1; k <= 15; ++k) {
            const auto direct = abc_decompose(t, k);
            BigRational b = 0;
            for (const auto &e : enumerate_b_monomials(3, k)) {
                b += b_coefficient(e, 3, k).coefficient * e.evaluate(t);
            }
            EXPECT_EQ(b, direct.B) << "k=" << k;
            BigRational c = 0;
            for (const auto &e : enumerate_c_monomials(3, k)) {
                c += c_coefficient(e, 3, k).coefficient * e.evaluate(t);
            }
            EXPECT_EQ(c, direct.C) << "k=" << k;
        }
    }
    const auto t5 = solve_coefficients(FamilyParams::make(5, 0), 12);
    for (std::uint64_t k = 1; k <= 12; ++k) {
        BigRational b = 0;
        for (const auto &e : enumerate_b_monomials(5, k)) {
            b += b_coefficient(e, 5, k).coefficient * e.evaluate(t5);
        }
        EXPECT_EQ(b, abc_decompose(t5, k).B);
    }
}

TEST(CMonomials, DivisibleClassAndSurvivor)
{
    for (std::uint64_t p : {3, 5}) {
        const auto q = p * p;
        for (std::uint64_t k = 2; k <= 20; ++k) {
            std::uint64_t units = 0;
            for (const auto &e : enumerate_c_monomials(p, k)) {
                const auto rec = c_coefficient(e, p, k);
                EXPECT_EQ(rec.valuation, ord_p(rec.coefficient, p));
                if (k % p == 0) {
                    EXPECT_GE(rec.valuation, Valuation(1));
                }
                if (rec.valuation == Valuation(0)) {
                    ++units;
                    EXPECT_EQ(e, MultiIndex({{0, q}, {k - 1, 1}}));
                    EXPECT_EQ(rec.coefficient, BigRational(static_cast<long>(k * (q + 1))));
                }
            }
            EXPECT_EQ(units, k % p == 0 ? 0U : 1U) << "p=" << p << " k=" << k;
        }
    }
}

TEST(Survivors, Examples)
{
    const auto s3 = classify_b_survivors(3, 3);
    EXPECT_EQ(s3.exceptional, 1U);
    EXPECT_EQ(s3.all_divisible, 0U);
    EXPECT_EQ(s3.unit_monomials, 1U);

    const auto s6 = classify_b_survivors(3, 6);
    EXPECT_EQ(s6.exceptional, 0U);
    EXPECT_TRUE(s6.unexplained.empty());

    const auto s9 = classify_b_survivors(3, 9);
    EXPECT_EQ(s9.exceptional, 0U);
    EXPECT_TRUE(s9.unexplained.empty());
    EXPECT_GE(s9.all_divisible, 1U);

    EXPECT_THROW(classify_b_survivors(3, 4), usage_error);
}

TEST(Survivors, ExhaustiveUpTo30)
{
    std::uint64_t units = 0;
    for (std::uint64_t k = 3; k <= 30; k += 3) {
        const auto s = classify_b_survivors(3, k);
        EXPECT_TRUE(s.unexplained.empty()) << "k=" << k;
        EXPECT_EQ(s.exceptional, k == 3 ? 1U : 0U);
        EXPECT_EQ(s.unit_monomials, s.exceptional + s.all_divisible);
        units += s.unit_monomials;
    }
    EXPECT_EQ(units, 20U);
}

TEST(DigitVectors, Basics)
{
    const auto d = dv(5, {1, 1});
    EXPECT_EQ(d.weight(), 2U);
    EXPECT_EQ(d.numeric_value(), 30U);
    EXPECT_EQ(dv(3, {2}).numeric_value(), 6U);
    EXPECT_EQ(dv(3, {0, 2, 1}).factorial(), 2);
    const auto all = enumerate_digit_vectors(3, 2, 2);
    EXPECT_EQ(all.size(), 5U); // (1,0) (2,0) (0,1) (0,2) (1,1)
    for (const auto &v : all) {
        EXPECT_FALSE(v.is_zero());
        EXPECT_LE(v.weight(), 2U);
    }
}

TEST(VectorPartitions, Examples)
{
    EXPECT_EQ(enumerate_vector_partitions(dv(3, {1})).size(), 1U);
    const auto two = enumerate_vector_partitions(dv(3, {2}));
    ASSERT_EQ(two.size(), 2U);
    std::multiset<std::uint64_t> counts;
    for (const auto &pi : two) {
        counts.insert(pi.block_count());
    }
    EXPECT_EQ(counts, (std::multiset<std::uint64_t>{1, 2}));
    EXPECT_EQ(enumerate_vector_partitions(dv(3, {1, 1})).size(), 2U);
    EXPECT_THROW(enumerate_vector_partitions(dv(7, {7})), guard_exceeded);
    EXPECT_THROW(enumerate_vector_partitions(dv(3, {0, 0})), usage_error);
}

TEST(VectorPartitions, CountsAreIntegerPartitionsInOneCoordinate)
{
    // One coordinate: vector partitions of (n) are integer partitions of n.
    for (std::uint64_t n = 1; n <= 6; ++n) {
        EXPECT_EQ(enumerate_vector_partitions(dv(7, {n})).size(), count_partitions(n, n, n));
    }
    // Multipartitions of (1,1,1): Bell number 5; of (2,1): 4; of (2,2): 9.
    EXPECT_EQ(enumerate_vector_partitions(dv(3, {1, 1, 1})).size(), 5U);
    EXPECT_EQ(enumerate_vector_partitions(dv(3, {2, 1})).size(), 4U);
    EXPECT_EQ(enumerate_vector_partitions(dv(5, {2, 2})).size(), 9U);
    for (const auto &pi : enumerate_vector_partitions(dv(5, {2, 1, 1}))) {
        std::vector<std::uint64_t> sum(3, 0);
        for (const auto &[beta, mult] : pi.blocks) {
            for (std::size_t i = 0; i < 3; ++i) {
                sum[i] += beta.d[i] * mult;
            }
        }
        EXPECT_EQ(sum, (std::vector<std::uint64_t>{2, 1, 1}));
    }
}

TEST(VectorB, MatchesDirectB)
{
    const auto t3 = solve_coefficients(FamilyParams::make(3, 0), 40);
    EXPECT_EQ(vector_b_expansion(t3, dv(3, {1}), 1), mod_p_reduce(abc_decompose(t3, 4).B, 3));
    EXPECT_EQ(vector_b_expansion(t3, dv(3, {2}), 1), mod_p_reduce(abc_decompose(t3, 7).B, 3));
    for (const auto &d : enumerate_digit_vectors(3, 3, 3)) {
        for (std::uint64_t a : {1, 2}) {
            const auto k = d.numeric_value() + a;
            if (k > 40) {
                continue;
            }
            EXPECT_EQ(vector_b_expansion(t3, d, a), mod_p_reduce(abc_decompose(t3, k).B, 3)) << d.str() << " a=" << a;
        }
    }
    const auto t5 = solve_coefficients(FamilyParams::make(5, 0), 32);
    EXPECT_EQ(vector_b_expansion(t5, dv(5, {1, 1}), 2), mod_p_reduce(abc_decompose(t5, 32).B, 5));
    EXPECT_THROW(vector_b_expansion(t5, dv(5, {1, 1}), 5), usage_error);
    EXPECT_THROW(vector_b_expansion(t3, dv(3, {0, 0, 2}), 1), usage_error);
}

TEST(BlockSeries, TransferMatchesPrediction)
{
    const auto t = solve_coefficients(FamilyParams::make(3, 0), 30);
    for (const auto &beta : enumerate_digit_vectors(3, 2, 2)) {
        EXPECT_EQ(block_series(t, beta, 2), predicted_block_series(t, beta.weight(), 2)) << beta.str();
    }
    const auto f = first_block_series(t, 2);
    EXPECT_EQ(f[0], Residue(1, 3));
    EXPECT_EQ(f[1], Residue(-1, 3));
}

TEST(SeriesIdentities, TruncatedExp)
{
    for (std::uint64_t p : {3, 5, 7}) {
        for (std::uint64_t m = 1; m <= 12; ++m) {
            EXPECT_TRUE(truncated_exp_identity(p, m).passed()) << "p=" << p << " m=" << m;
        }
        const auto m2 = truncated_exp_identity(p, 2);
        EXPECT_EQ(m2.witnesses[0].actual, make_rational(BigInt(static_cast<long>(p * p - 1)), BigInt(2)).get_str());
        EXPECT_EQ(truncated_exp_identity(p, 1).witnesses[0].actual, "0");
    }
    EXPECT_THROW(truncated_exp_identity(3, 0), usage_error);
}

TEST(SeriesIdentities, TreeFunction)
{
    const auto rep = tree_function_check(20);
    EXPECT_TRUE(rep.passed());
    ASSERT_EQ(rep.witnesses.size(), 20U);
    EXPECT_EQ(rep.witnesses[0].actual, "1");
    EXPECT_EQ(rep.witnesses[1].actual, "-1");
    EXPECT_EQ(rep.witnesses[2].actual, "3/2");
    // Independent oracle: 4^3 / 4! = 8/3 with sign (-1)^3.
    EXPECT_EQ(rep.witnesses[3].actual, "-8/3");
}

TEST(Cumulant, Examples)
{
    const auto t5 = solve_coefficients(FamilyParams::make(5, 0), 60);
    const auto r1 = cumulant_collapse_check(t5, 1, dv(5, {1}));
    EXPECT_TRUE(r1.passed());
    EXPECT_EQ(r1.witnesses[0].expected, "1");
    const auto r2 = cumulant_collapse_check(t5, 2, dv(5, {1, 1}));
    EXPECT_TRUE(r2.passed());
    EXPECT_EQ(r2.witnesses[0].expected, "3");

    const auto t7 = solve_coefficients(FamilyParams::make(7, 0), 30);
    const auto r3 = cumulant_collapse_check(t7, 3, dv(7, {2}));
    EXPECT_TRUE(r3.passed());
    // (-1)^{s+1} a^{s+1} a_{a-1} with s = 2, a = 3.
    const auto expected = sign_residue(3, 7) * Residue(27, 7) * mod_p_reduce(t7.a(2), 7);
    EXPECT_EQ(r3.witnesses[0].expected, std::to_string(expected.value));

    EXPECT_THROW(cumulant_collapse_check(t5, 1, dv(5, {5})), usage_error);
    EXPECT_THROW(cumulant_collapse_check(solve_coefficients(FamilyParams::make(5, 1), 10), 1, dv(5, {1})),
                 usage_error);
}
