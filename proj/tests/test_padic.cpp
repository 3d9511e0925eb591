#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <boettcher/padic.hpp>

using namespace boettcher;

namespace {

// Brute-force oracles.
std::int64_t floor_sum(std::uint64_t n, std::uint64_t p)
{
    std::int64_t s = 0;
    for (std::uint64_t pw = p; pw <= n; pw *= p) {
        s += static_cast<std::int64_t>(n / pw);
    }
    return s;
}

std::uint64_t simulated_carries(std::uint64_t u, std::uint64_t v, std::uint64_t p)
{
    std::uint64_t carries = 0;
    std::uint64_t carry = 0;
    while (u > 0 || v > 0 || carry > 0) {
        auto d = u % p + v % p + carry;
        carry = d >= p ? 1 : 0;
        carries += carry;
        u /= p;
        v /= p;
    }
    return carries;
}

std::uint64_t prime_to_p_factorial_mod_p(std::uint64_t n, std::uint64_t p)
{
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= n; ++i) {
        auto j = i;
        while (j % p == 0) {
            j /= p;
        }
        r = r * (j % p) % p;
    }
    return r;
}

} // namespace

TEST(OrdP, Examples)
{
    EXPECT_EQ(ord_p(BigInt(9), 3), Valuation(2));
    EXPECT_EQ(ord_p(factorial(10), 3), Valuation(floor_sum(10, 3)));
    EXPECT_EQ(ord_p(factorial(10), 3), Valuation(4));
    EXPECT_EQ(ord_p(BigRational(1, 2), 3), Valuation(0));
    EXPECT_EQ(ord_p(BigRational(5, 27), 3), Valuation(-3));
    EXPECT_EQ(ord_p(std::int64_t{-75}, 5), Valuation(2));
}

TEST(OrdP, ZeroIsInfinite)
{
    EXPECT_TRUE(ord_p(BigInt(0), 3).is_infinite());
    EXPECT_TRUE(ord_p(BigRational(0), 5).is_infinite());
    EXPECT_GT(ord_p(BigInt(0), 3), Valuation(1000000));
    EXPECT_THROW(ord_p(BigInt(0), 3).value(), domain_error);
    EXPECT_EQ(ord_p(BigInt(0), 3).str(), "inf");
}

TEST(OrdP, RejectsNonPrimes)
{
    EXPECT_THROW(ord_p(BigInt(8), 4), usage_error);
    EXPECT_THROW(ord_p(BigRational(1, 3), 9), usage_error);
    EXPECT_THROW(ord_p(BigInt(8), 2), usage_error);
}

TEST(OrdP, MultiplicativeOnRandomRationals)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> num(-5000, 5000);
    std::uniform_int_distribution<long> den(1, 5000);
    for (int i = 0; i < 500; ++i) {
        BigRational x(num(rng), den(rng));
        BigRational y(num(rng), den(rng));
        x.canonicalize();
        y.canonicalize();
        if (x == 0 || y == 0) {
            continue;
        }
        BigRational xy = x * y;
        for (std::uint64_t p : {3, 5, 7}) {
            EXPECT_EQ(ord_p(xy, p), ord_p(x, p) + ord_p(y, p));
        }
    }
}

TEST(DigitSum, Examples)
{
    for (std::uint64_t p : {3, 5, 7, 11}) {
        for (std::uint64_t k = 0; k < 6; ++k) {
            EXPECT_EQ(digit_sum(upow(p, k), p), 1U);
        }
    }
    EXPECT_EQ(digit_sum(10, 3), 2U);
    EXPECT_EQ(digit_sum(BigInt(10), 3), 2U);
    EXPECT_EQ(digits(10, 3).digits, (std::vector<std::uint64_t>{1, 0, 1}));
    EXPECT_EQ(digits(0, 3).digits.size(), 0U);
}

TEST(DigitSum, Properties)
{
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::uint64_t> dist(0, 10000);
    for (int i = 0; i < 2000; ++i) {
        const auto u = dist(rng);
        const auto v = dist(rng);
        for (std::uint64_t p : {3, 5, 7}) {
            EXPECT_EQ(digit_sum(u, p) % (p - 1), u % (p - 1));
            EXPECT_LE(digit_sum(u + v, p), digit_sum(u, p) + digit_sum(v, p));
            EXPECT_EQ(digit_sum(p * p * u, p), digit_sum(u, p));
            EXPECT_EQ(digits(u, p).value(), u);
            EXPECT_EQ(digits(u, p).digit_sum(), digit_sum(u, p));
            EXPECT_EQ(digit_sum(BigInt(static_cast<unsigned long>(u)), p), digit_sum(u, p));
        }
    }
}

TEST(FactorialValuation, MatchesFloorSum)
{
    for (std::uint64_t p : {3, 5, 7}) {
        for (std::uint64_t n = 0; n <= 10000; ++n) {
            ASSERT_EQ(factorial_valuation(n, p), Valuation(floor_sum(n, p))) << "n=" << n << " p=" << p;
        }
    }
    EXPECT_EQ(factorial_valuation(0, 3), Valuation(0));
    EXPECT_EQ(factorial_valuation(10, 3), Valuation(4));
    for (std::uint64_t p : {3, 5, 7, 11}) {
        EXPECT_EQ(factorial_valuation(p * p, p), Valuation(static_cast<std::int64_t>(p + 1)));
    }
}

TEST(FactorialValuation, AgreesWithExactFactorial)
{
    for (std::uint64_t n = 0; n <= 300; n += 7) {
        EXPECT_EQ(factorial_valuation(n, 3), ord_p(factorial(n), 3));
    }
}

TEST(CarryDefect, Examples)
{
    const std::vector<std::uint64_t> ones3{1, 1, 1};
    EXPECT_EQ(carry_defect(ones3, 3), 1U);
    const std::vector<std::uint64_t> single{17};
    EXPECT_EQ(carry_defect(single, 3), 0U);
    const std::vector<std::uint64_t> ones9(9, 1);
    EXPECT_EQ(carry_defect(ones9, 3), 4U);
    EXPECT_THROW(carry_defect(std::vector<std::uint64_t>{}, 3), usage_error);
}

TEST(CarryDefect, CountsCarriesOfPairwiseAddition)
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::uint64_t> dist(0, 10000);
    for (int i = 0; i < 2000; ++i) {
        const std::vector<std::uint64_t> uv{dist(rng), dist(rng)};
        for (std::uint64_t p : {3, 5, 7}) {
            EXPECT_EQ(carry_defect(uv, p), simulated_carries(uv[0], uv[1], p));
        }
    }
}

TEST(ModP, Reduce)
{
    EXPECT_EQ(mod_p_reduce(BigRational(1, 2), 3), Residue(2, 3));
    EXPECT_EQ(mod_p_reduce(BigRational(0), 7), Residue(0, 7));
    EXPECT_EQ(mod_p_reduce(BigRational(-27), 3), Residue(0, 3));
    EXPECT_EQ(mod_p_reduce(BigRational(-1), 5), Residue(4, 5));
    EXPECT_THROW(mod_p_reduce(BigRational(1, 3), 3), integrality_error);
    EXPECT_EQ(mod_p_reduce(BigInt(-7), 5), Residue(3, 5));
}

TEST(ModP, ResidueArithmetic)
{
    for (std::uint64_t p : {3, 5, 7, 11, 13}) {
        for (std::int64_t x = 1; x < static_cast<std::int64_t>(p); ++x) {
            Residue r(x, p);
            EXPECT_EQ(r * r.inverse(), Residue(1, p));
            EXPECT_EQ(r.pow(p - 1), Residue(1, p));
            EXPECT_EQ(r + (-r), Residue(0, p));
        }
        EXPECT_THROW(Residue(0, p).inverse(), domain_error);
    }
    EXPECT_EQ(Residue(-1, 5).value, 4U);
    EXPECT_EQ(sign_residue(3, 7), Residue(-1, 7));
    EXPECT_EQ(sign_residue(4, 7), Residue(1, 7));
}

TEST(UnitPart, Examples)
{
    for (std::uint64_t p : {3, 5, 7}) {
        for (std::uint64_t r = 0; r < 5; ++r) {
            BigRational x(-ipow(BigInt(static_cast<unsigned long>(p)), r));
            EXPECT_EQ(unit_part_mod_p(x, p, static_cast<std::int64_t>(r)), Residue(-1, p));
        }
    }
    EXPECT_EQ(unit_part_mod_p(BigRational(6), 3, 1), Residue(2, 3));
    // 9! = 3^4 * 4480 and 4480 = 1 mod 3.
    EXPECT_EQ(unit_part_mod_p(BigRational(factorial(9)), 3, 4), Residue(1, 3));
}

TEST(UnitPart, MismatchCarriesBothValuations)
{
    try {
        unit_part_mod_p(BigRational(18), 3, 1);
        FAIL() << "expected valuation_mismatch";
    } catch (const valuation_mismatch &e) {
        EXPECT_EQ(e.expected(), 1);
        EXPECT_EQ(e.actual(), "2");
    }
    EXPECT_THROW(unit_part_mod_p(BigRational(0), 3, 0), valuation_mismatch);
}

TEST(UnitPart, InvariantUnderShift)
{
    std::mt19937_64 rng(14);
    std::uniform_int_distribution<long> dist(1, 100000);
    for (int i = 0; i < 300; ++i) {
        BigRational x(dist(rng), dist(rng));
        x.canonicalize();
        for (std::uint64_t p : {3, 5, 7}) {
            const auto v = ord_p(x, p).value();
            const auto base = unit_part_mod_p(x, p, v);
            for (std::uint64_t t = 0; t < 5; ++t) {
                BigRational shifted = x * BigRational(ipow(BigInt(static_cast<unsigned long>(p)), t));
                EXPECT_EQ(unit_part_mod_p(shifted, p, v + static_cast<std::int64_t>(t)), base);
            }
        }
    }
}

TEST(PrimePartFactorial, Examples)
{
    EXPECT_EQ(prime_part_factorial_mod_p(5, 5), Residue(4, 5));
    for (std::uint64_t p : {3, 5, 7, 11}) {
        EXPECT_EQ(prime_part_factorial_mod_p(p - 1, p), Residue(-1, p));
        for (std::uint64_t m = 0; m < 6; ++m) {
            EXPECT_EQ(prime_part_factorial_mod_p(upow(p, m), p), sign_residue(static_cast<std::int64_t>(m), p));
        }
    }
}

TEST(PrimePartFactorial, MatchesBruteForce)
{
    for (std::uint64_t p : {3, 5, 7}) {
        for (std::uint64_t n = 0; n <= 3000; ++n) {
            ASSERT_EQ(prime_part_factorial_mod_p(n, p).value, prime_to_p_factorial_mod_p(n, p)) << n;
        }
    }
}

TEST(PrimePartFactorial, MatchesExactFactorial)
{
    for (std::uint64_t n : {0, 1, 9, 27, 100, 243}) {
        const auto v = factorial_valuation(n, 3).value();
        EXPECT_EQ(unit_part_mod_p(BigRational(factorial(n)), 3, v), prime_part_factorial_mod_p(n, 3));
    }
}

TEST(Primes, Validation)
{
    EXPECT_NO_THROW(require_odd_prime(3));
    EXPECT_NO_THROW(require_odd_prime(97));
    EXPECT_THROW(require_odd_prime(2), usage_error);
    EXPECT_THROW(require_odd_prime(9), usage_error);
    EXPECT_THROW(require_odd_prime(1), usage_error);
    EXPECT_THROW(require_odd_prime(0), usage_error);
}

TEST(Valuation, Ordering)
{
    EXPECT_LT(Valuation(-3), Valuation(2));
    EXPECT_LT(Valuation(100), Valuation::infinite());
    EXPECT_EQ(Valuation::infinite(), Valuation::infinite());
    EXPECT_TRUE((Valuation(2) + Valuation::infinite()).is_infinite());
    EXPECT_EQ(Valuation(2) + Valuation(3), Valuation(5));
}

TEST(Binomial, SmallValues)
{
    EXPECT_EQ(binomial(8, 2), 28);
    EXPECT_EQ(binomial(24, 4), 10626);
    EXPECT_EQ(mod_p_reduce(binomial(8, 2), 3), Residue(1, 3));
}
