#pragma once

// Check registry, run configuration and per-cell execution shared by the CLI
// and the acceptance suite.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <boettcher/combinat.hpp>
#include <boettcher/errors.hpp>
#include <boettcher/io.hpp>
#include <boettcher/solver.hpp>
#include <boettcher/verify.hpp>

namespace boettcher {

enum class Fiber { special, higher, any };

struct CheckInfo {
    std::string name;
    Fiber fiber;
};

/// Every check the runner knows, in report order.
inline const std::vector<CheckInfo> &check_registry()
{
    static const std::vector<CheckInfo> checks{
        {"residual", Fiber::any},          {"normalization", Fiber::any},
        {"ac_lemmas", Fiber::any},         {"first_block", Fiber::special},
        {"log_first_block", Fiber::special}, {"digit_sum", Fiber::special},
        {"conj25", Fiber::special},        {"b_survivors", Fiber::special},
        {"vector_b", Fiber::special},      {"cumulant_collapse", Fiber::special},
        {"block_transfer", Fiber::special}, {"truncated_exp", Fiber::special},
        {"tree_function", Fiber::special}, {"v_table", Fiber::higher},
        {"branch_pattern", Fiber::higher}, {"pure_units", Fiber::higher},
        {"slope_27a", Fiber::higher},      {"lambda_bound", Fiber::higher},
        {"leading_term", Fiber::higher},   {"subadditivity", Fiber::higher},
        {"alpha_gamma", Fiber::any},
    };
    return checks;
}

inline const CheckInfo *find_check(const std::string &name)
{
    for (const auto &c : check_registry()) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

/// Fixed ranges used by the runner for checks whose range is not K itself.
struct CheckLimits {
    std::uint64_t ac_k_max = 60;
    std::uint64_t survivor_k_max_p3 = 30;
    std::uint64_t survivor_k_max = enumeration_k_guard;
    std::uint64_t truncated_exp_m = 20;
    std::uint64_t tree_order = 20;
    std::uint64_t subadditivity_samples = 2000;
    std::uint64_t cumulant_length = 3;
    std::uint64_t cumulant_weight = 3;
    std::uint64_t cumulant_a = 3;
    std::uint64_t transfer_weight = 2;
};

inline std::uint64_t vector_b_weight(std::uint64_t p) { return p == 3 ? 3 : 2; }

/// Largest n >= 2 with p^n within the alpha/gamma guard, or 0 if none.
inline std::uint64_t alpha_gamma_levels(std::uint64_t p)
{
    std::uint64_t n = 0;
    for (std::uint64_t pw = p; pw <= alpha_gamma_guard; pw *= p) {
        ++n;
    }
    return n >= 2 ? n : 0;
}

/// Why `check` cannot run on the cell, or nullopt if it can.
inline std::optional<std::string> inapplicable_reason(const std::string &check, std::uint64_t p, std::uint64_t r,
                                                      std::uint64_t k, const CheckLimits &lim = {})
{
    const auto *info = find_check(check);
    if (!info) {
        return "unknown check \"" + check + "\"";
    }
    const auto cell = " (p=" + std::to_string(p) + ", r=" + std::to_string(r) + ", K=" + std::to_string(k) + ")";
    if (info->fiber == Fiber::special && r != 0) {
        return check + " applies to r = 0 only" + cell;
    }
    if (info->fiber == Fiber::higher && r == 0) {
        return check + " applies to r >= 1 only" + cell;
    }
    if (check == "normalization" && k < 1) {
        return "normalization needs K >= 1";
    }
    if ((check == "first_block" || check == "log_first_block") && k < p - 1) {
        return check + " needs K >= p-1" + cell;
    }
    if (check == "conj25" && k < p) {
        return "conj25 needs K >= p" + cell;
    }
    if (check == "b_survivors") {
        auto cap = std::min(k, p == 3 ? lim.survivor_k_max_p3 : lim.survivor_k_max);
        if (cap < p) {
            return "b_survivors has no p | k within range" + cell;
        }
    }
    if (check == "vector_b" && fitting_length(p, vector_b_weight(p), p - 1, k) == 0) {
        return "vector_b: no digit vectors fit" + cell;
    }
    if (check == "block_transfer" && fitting_length(p, lim.transfer_weight, p - 1, k) == 0) {
        return "block_transfer: no digit vectors fit" + cell;
    }
    if (check == "cumulant_collapse" && k < std::min(lim.cumulant_a, p - 1)) {
        return "cumulant_collapse needs K >= a" + cell;
    }
    if (check == "alpha_gamma" && alpha_gamma_levels(p) == 0) {
        return "alpha_gamma: p^2 exceeds the factorial guard" + cell;
    }
    const auto levels = detail::top_level(p, k);
    if (info->fiber == Fiber::higher && levels < 1) {
        return check + " needs K >= p" + cell;
    }
    if (check == "branch_pattern" && levels < 2) {
        return "branch_pattern needs K >= p^2" + cell;
    }
    if (check == "slope_27a") {
        const auto two_s = 2 * ((r + 1) / 2);
        if (two_s > levels) {
            return "slope_27a needs p^{2s} = p^" + std::to_string(two_s) + " <= K" + cell;
        }
    }
    if (check == "leading_term" && k < 2 * p) {
        return "leading_term has no non-pure p | k <= K" + cell;
    }
    return std::nullopt;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// is rethrown after all workers finish.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)> &fn)
{
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &t : workers) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

/// One check on a frozen table. `vt` must be set for the r >= 1 checks.
inline CheckReport run_check(const std::string &check, const CoefficientTable &table, const VTable *vt,
                             const CheckLimits &lim = {})
{
    const auto p = table.params().p;
    const auto k = table.max_k();
    auto need_vt = [&]() -> const VTable & {
        if (!vt) {
            throw usage_error(check + " needs the v-table");
        }
        return *vt;
    };
    if (check == "residual") {
        return residual_check(table);
    }
    if (check == "normalization") {
        return check_normalization(table);
    }
    if (check == "ac_lemmas") {
        return check_A_C_lemmas(table, lim.ac_k_max);
    }
    if (check == "first_block") {
        return check_first_block(table);
    }
    if (check == "log_first_block") {
        return check_log_first_block(table);
    }
    if (check == "digit_sum") {
        return check_digit_sum(table);
    }
    if (check == "conj25") {
        return check_conj25(table);
    }
    if (check == "b_survivors") {
        auto rep = check_b_survivors(p, std::min(k, p == 3 ? lim.survivor_k_max_p3 : lim.survivor_k_max));
        rep.r = table.params().r;
        return rep;
    }
    if (check == "vector_b") {
        const auto w = vector_b_weight(p);
        return check_vector_b(table, fitting_length(p, w, p - 1, k), w);
    }
    if (check == "cumulant_collapse") {
        return check_cumulant_collapse(table, lim.cumulant_length, std::min(lim.cumulant_weight, p - 1),
                                       std::min(lim.cumulant_a, p - 1));
    }
    if (check == "block_transfer") {
        return check_block_transfer(table, fitting_length(p, lim.transfer_weight, p - 1, k), lim.transfer_weight);
    }
    if (check == "truncated_exp") {
        return check_truncated_exp(p, lim.truncated_exp_m);
    }
    if (check == "tree_function") {
        auto rep = tree_function_check(lim.tree_order);
        rep.p = p;
        return rep;
    }
    if (check == "alpha_gamma") {
        auto rep = check_alpha_gamma(p, alpha_gamma_levels(p));
        rep.r = table.params().r;
        return rep;
    }
    if (check == "branch_pattern") {
        return check_branch_pattern(need_vt());
    }
    if (check == "pure_units") {
        return check_pure_units(table, need_vt());
    }
    if (check == "slope_27a") {
        return check_pure_slope_and_27a(table, need_vt());
    }
    if (check == "lambda_bound") {
        return check_lambda_lower_bound(table, need_vt());
    }
    if (check == "leading_term") {
        return check_leading_term(table, need_vt());
    }
    if (check == "subadditivity") {
        return check_subadditivity(need_vt(), lim.subadditivity_samples);
    }
    throw usage_error("unknown check \"" + check + "\"");
}

/// Expands "all" into the checks applicable to the cell; explicit names must
/// all apply, otherwise the request is a usage error.
inline std::vector<std::string> schedule_checks(const std::vector<std::string> &requested, std::uint64_t p,
                                                std::uint64_t r, std::uint64_t k, const CheckLimits &lim = {})
{
    const bool all = requested.empty() || std::find(requested.begin(), requested.end(), "all") != requested.end();
    std::vector<std::string> out;
    for (const auto &info : check_registry()) {
        const bool wanted = all || std::find(requested.begin(), requested.end(), info.name) != requested.end();
        if (!wanted) {
            continue;
        }
        auto reason = inapplicable_reason(info.name, p, r, k, lim);
        if (reason) {
            if (!all) {
                throw usage_error(*reason);
            }
            continue;
        }
        out.push_back(info.name);
    }
    for (const auto &name : requested) {
        if (name != "all" && !find_check(name)) {
            throw usage_error("unknown check \"" + name + "\"");
        }
    }
    return out;
}

struct CellResult {
    std::uint64_t p = 0;
    std::uint64_t r = 0;
    std::uint64_t max_k = 0;
    std::vector<CheckReport> reports;
    std::optional<VTable> vtable;

    bool passed() const
    {
        return !reports.empty() &&
               std::all_of(reports.begin(), reports.end(), [](const CheckReport &c) { return c.passed(); });
    }

    const CheckReport *report(const std::string &name) const
    {
        for (const auto &rep : reports) {
            if (rep.name == name) {
                return &rep;
            }
        }
        return nullptr;
    }
};

/// Runs the scheduled checks on a frozen table, `jobs` at a time; reports come
/// back in schedule order.
inline CellResult run_cell(const CoefficientTable &table, const std::vector<std::string> &checks,
                           std::size_t jobs = 1, const CheckLimits &lim = {})
{
    CellResult cell;
    cell.p = table.params().p;
    cell.r = table.params().r;
    cell.max_k = table.max_k();

    const bool needs_vt = table.params().r != 0 && std::any_of(checks.begin(), checks.end(), [](const auto &c) {
                              const auto *info = find_check(c);
                              return info && info->fiber == Fiber::higher;
                          });
    if (needs_vt) {
        auto [vt, rep] = build_v_table(table, detail::top_level(cell.p, cell.max_k));
        cell.vtable = std::move(vt);
        if (std::find(checks.begin(), checks.end(), "v_table") != checks.end()) {
            cell.reports.push_back(std::move(rep));
        }
    }

    std::vector<std::string> rest;
    for (const auto &c : checks) {
        if (c != "v_table") {
            rest.push_back(c);
        }
    }
    std::vector<CheckReport> out(rest.size());
    const VTable *vt = cell.vtable ? &*cell.vtable : nullptr;
    parallel_for(rest.size(), jobs, [&](std::size_t i) {
        try {
            out[i] = run_check(rest[i], table, vt, lim);
        } catch (const std::domain_error &e) {
            // Data the check cannot evaluate (a non-integral a_k, say) is a failure.
            out[i].name = rest[i];
            out[i].p = cell.p;
            out[i].r = cell.r;
            out[i].add(0, "evaluable table", std::string("error: ") + e.what(), false);
        }
    });

    // Deterministic order: registry order, v_table included.
    for (auto &rep : out) {
        cell.reports.push_back(std::move(rep));
    }
    std::stable_sort(cell.reports.begin(), cell.reports.end(), [](const CheckReport &a, const CheckReport &b) {
        auto pos = [](const std::string &n) {
            const auto &reg = check_registry();
            return std::find_if(reg.begin(), reg.end(), [&](const CheckInfo &c) { return c.name == n; }) - reg.begin();
        };
        return pos(a.name) < pos(b.name);
    });
    return cell;
}

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
    std::vector<std::uint64_t> primes{3};
    std::vector<std::uint64_t> r_values{0};
    /// K per prime; primes without an entry use desk_scale_cap(p).
    std::map<std::uint64_t, std::uint64_t> max_k;
    std::vector<std::string> checks{"all"};
    std::filesystem::path out{"out"};
    std::size_t jobs = 1;

    std::uint64_t k_for(std::uint64_t p) const
    {
        auto it = max_k.find(p);
        return it == max_k.end() ? desk_scale_cap(p) : it->second;
    }
};

/// Reads a JSON config: {"p": [...], "r": [...], "max_k": n or {"p": n},
/// "checks": [...], "out": "...", "jobs": n}. Absent fields keep defaults.
inline RunConfig config_from_json(const nlohmann::json &j)
{
    if (!j.is_object()) {
        throw usage_error("config must be a JSON object");
    }
    RunConfig cfg;
    try {
        if (j.contains("p")) {
            cfg.primes = j["p"].is_array() ? j["p"].get<std::vector<std::uint64_t>>()
                                           : std::vector<std::uint64_t>{j["p"].get<std::uint64_t>()};
        }
        if (j.contains("r")) {
            cfg.r_values = j["r"].is_array() ? j["r"].get<std::vector<std::uint64_t>>()
                                             : std::vector<std::uint64_t>{j["r"].get<std::uint64_t>()};
        }
        if (j.contains("max_k")) {
            const auto &mk = j["max_k"];
            if (mk.is_object()) {
                for (const auto &[key, val] : mk.items()) {
                    cfg.max_k[std::stoull(key)] = val.get<std::uint64_t>();
                }
            } else {
                for (auto p : cfg.primes) {
                    cfg.max_k[p] = mk.get<std::uint64_t>();
                }
            }
        }
        if (j.contains("checks")) {
            cfg.checks = j["checks"].get<std::vector<std::string>>();
        }
        if (j.contains("out")) {
            cfg.out = j["out"].get<std::string>();
        }
        if (j.contains("jobs")) {
            cfg.jobs = j["jobs"].get<std::size_t>();
        }
    } catch (const nlohmann::json::exception &e) {
        throw usage_error(std::string("bad config: ") + e.what());
    } catch (const std::logic_error &e) {
        throw usage_error(std::string("bad config: ") + e.what());
    }
    return cfg;
}

/// Enforces primes, caps, r range and known check names.
inline void validate_config(const RunConfig &cfg)
{
    if (cfg.primes.empty() || cfg.r_values.empty()) {
        throw usage_error("need at least one p and one r");
    }
    if (cfg.jobs == 0) {
        throw usage_error("--jobs must be >= 1");
    }
    for (auto p : cfg.primes) {
        require_odd_prime(p);
        const auto cap = desk_scale_cap(p);
        if (cap == 0) {
            throw usage_error("p = " + std::to_string(p) + " is outside the supported primes");
        }
        const auto k = cfg.k_for(p);
        if (k < 1 || k > cap) {
            throw usage_error("K = " + std::to_string(k) + " outside 1.." + std::to_string(cap) + " for p = " +
                              std::to_string(p));
        }
    }
    for (auto r : cfg.r_values) {
        if (r > max_supported_r) {
            throw usage_error("r = " + std::to_string(r) + " outside 0.." + std::to_string(max_supported_r));
        }
    }
    for (const auto &c : cfg.checks) {
        if (c != "all" && !find_check(c)) {
            throw usage_error("unknown check \"" + c + "\"");
        }
    }
}

} // namespace boettcher
