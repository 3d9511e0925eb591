#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace boettcher {

struct Witness {
    std::uint64_t index = 0;
    std::string expected;
    std::string actual;
    bool pass = false;
    /// Sub-statement label ("eq1", "min", ...); empty for single-statement checks.
    std::string tag;
};

/// Outcome of one check. The verdict is pass iff the range produced at
/// least one witness and every witness passed.
struct CheckReport {
    std::string name;
    std::uint64_t p = 0;
    std::uint64_t r = 0;
    std::string range;
    std::vector<Witness> witnesses;
    /// Scalar findings (empirical bounds, equality counts, ...), ordered by key.
    std::map<std::string, std::string> metrics;

    void add(std::uint64_t index, std::string expected, std::string actual, bool pass, std::string tag = {})
    {
        witnesses.push_back({index, std::move(expected), std::move(actual), pass, std::move(tag)});
    }

    /// Records an equality witness; pass iff the strings match.
    void expect_equal(std::uint64_t index, const std::string &expected, const std::string &actual,
                      std::string tag = {})
    {
        add(index, expected, actual, expected == actual, std::move(tag));
    }

    std::size_t failures() const
    {
        return static_cast<std::size_t>(
            std::count_if(witnesses.begin(), witnesses.end(), [](const Witness &w) { return !w.pass; }));
    }

    bool passed() const { return !witnesses.empty() && failures() == 0; }

    const Witness *first_failure() const
    {
        auto it = std::find_if(witnesses.begin(), witnesses.end(), [](const Witness &w) { return !w.pass; });
        return it == witnesses.end() ? nullptr : &*it;
    }
};

} // namespace boettcher
