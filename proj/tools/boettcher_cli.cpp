// boettcher: compute coefficient tables, verify them, sweep (p, r) grids.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <boettcher/io.hpp>
#include <boettcher/runner.hpp>
#include <boettcher/solver.hpp>

namespace fs = std::filesystem;
using namespace boettcher;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

struct Flags {
    std::vector<std::uint64_t> p;
    std::vector<std::uint64_t> r;
    std::uint64_t max_k = 0;
    std::string checks;
    std::string out;
    std::size_t jobs = 0;
    std::string config;

    CLI::Option *p_opt = nullptr;
    CLI::Option *r_opt = nullptr;
    CLI::Option *k_opt = nullptr;
    CLI::Option *checks_opt = nullptr;
    CLI::Option *out_opt = nullptr;
    CLI::Option *jobs_opt = nullptr;
};

void add_flags(CLI::App *cmd, Flags &f)
{
    f.p_opt = cmd->add_option("--p", f.p, "Primes, comma separated")->delimiter(',');
    f.r_opt = cmd->add_option("--r", f.r, "Values of r, comma separated")->delimiter(',');
    f.k_opt = cmd->add_option("--max-k", f.max_k, "Table length K (default: the cap for each prime)");
    f.checks_opt = cmd->add_option("--checks", f.checks, "Comma separated check names, or all");
    f.out_opt = cmd->add_option("--out", f.out, "Output directory");
    f.jobs_opt = cmd->add_option("--jobs", f.jobs, "Cells run concurrently");
    cmd->add_option("--config", f.config, "JSON config file; flags override it");
}

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

RunConfig resolve_config(const Flags &f)
{
    RunConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) {
            throw usage_error("cannot read config " + f.config);
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception &e) {
            throw usage_error("config " + f.config + ": " + e.what());
        }
        cfg = config_from_json(j);
    }
    if (f.p_opt->count() > 0) {
        cfg.primes = f.p;
    }
    if (f.r_opt->count() > 0) {
        cfg.r_values = f.r;
    }
    if (f.k_opt->count() > 0) {
        cfg.max_k.clear();
        for (auto p : cfg.primes) {
            cfg.max_k[p] = f.max_k;
        }
    }
    if (f.checks_opt->count() > 0) {
        cfg.checks = split_list(f.checks);
        if (cfg.checks.empty()) {
            throw usage_error("--checks is empty");
        }
    }
    if (f.out_opt->count() > 0) {
        cfg.out = f.out;
    }
    if (f.jobs_opt->count() > 0) {
        cfg.jobs = f.jobs;
    }
    validate_config(cfg);
    return cfg;
}

struct Cell {
    std::uint64_t p;
    std::uint64_t r;
    std::uint64_t k;
    std::vector<std::string> checks;
};

std::vector<Cell> plan_cells(const RunConfig &cfg, bool with_checks)
{
    std::vector<Cell> cells;
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    for (auto p : cfg.primes) {
        for (auto r : cfg.r_values) {
            if (!seen.insert({p, r}).second) {
                continue;
            }
            Cell c{p, r, cfg.k_for(p), {}};
            if (with_checks) {
                c.checks = schedule_checks(cfg.checks, p, r, c.k);
            }
            cells.push_back(std::move(c));
        }
    }
    return cells;
}

/// The stored table for the cell if one exists (truncated to K), else a fresh one.
CoefficientTable acquire_table(const RunConfig &cfg, const Cell &c)
{
    const auto path = cfg.out / table_file_name(c.p, c.r);
    if (fs::exists(path)) {
        auto table = load_table(path);
        if (table.params() != FamilyParams::make(c.p, c.r)) {
            throw usage_error(path.string() + " holds a different (p, r) cell");
        }
        if (table.max_k() < c.k) {
            throw usage_error(path.string() + " has K = " + std::to_string(table.max_k()) + " < requested " +
                              std::to_string(c.k));
        }
        return table.max_k() == c.k ? table : table.truncated(c.k);
    }
    return solve_coefficients(FamilyParams::make(c.p, c.r), c.k);
}

void print_cell(const CellResult &cell)
{
    for (const auto &rep : cell.reports) {
        std::cout << (rep.passed() ? "PASS " : "FAIL ") << rep.name << " p=" << rep.p << " r=" << rep.r << " ["
                  << rep.range << "] " << rep.witnesses.size() << " witnesses";
        if (const auto *w = rep.first_failure()) {
            std::cout << ", " << rep.failures() << " failed; first: index=" << w->index
                      << (w->tag.empty() ? "" : " tag=" + w->tag) << " expected=" << w->expected
                      << " actual=" << w->actual;
        } else if (rep.witnesses.empty()) {
            std::cout << ", empty range";
        }
        std::cout << "\n";
    }
}

int cmd_compute(const RunConfig &cfg)
{
    fs::create_directories(cfg.out);
    auto cells = plan_cells(cfg, false);
    std::vector<std::string> written(cells.size());
    parallel_for(cells.size(), cfg.jobs, [&](std::size_t i) {
        const auto &c = cells[i];
        const auto table = solve_coefficients(FamilyParams::make(c.p, c.r), c.k);
        const auto path = cfg.out / table_file_name(c.p, c.r);
        save_table(table, path);
        written[i] = path.string();
    });
    for (const auto &w : written) {
        std::cout << "wrote " << w << "\n";
    }
    return exit_pass;
}

std::vector<CellResult> run_cells(const RunConfig &cfg, const std::vector<Cell> &cells)
{
    std::vector<CellResult> results(cells.size());
    parallel_for(cells.size(), cfg.jobs, [&](std::size_t i) {
        const auto table = acquire_table(cfg, cells[i]);
        results[i] = run_cell(table, cells[i].checks, cfg.jobs);
        write_text(cfg.out / report_file_name(cells[i].p, cells[i].r), reports_to_csv(results[i].reports));
    });
    return results;
}

int cmd_verify(const RunConfig &cfg)
{
    const auto cells = plan_cells(cfg, true);
    fs::create_directories(cfg.out);
    const auto results = run_cells(cfg, cells);
    bool ok = true;
    for (const auto &cell : results) {
        print_cell(cell);
        ok = ok && cell.passed();
    }
    std::cout << (ok ? "all checks passed" : "some checks failed") << "\n";
    return ok ? exit_pass : exit_fail;
}

std::string cell_label(const CellResult &c)
{
    return "p" + std::to_string(c.p) + "_r" + std::to_string(c.r);
}

int cmd_sweep(const RunConfig &cfg)
{
    const auto cells = plan_cells(cfg, true);
    fs::create_directories(cfg.out);
    const auto results = run_cells(cfg, cells);

    // Pass matrix: one row per check, one column per cell.
    std::vector<std::string> header{"check"};
    for (const auto &c : results) {
        header.push_back(cell_label(c));
    }
    std::string matrix = csv_row(header);
    for (const auto &info : check_registry()) {
        std::vector<std::string> row{info.name};
        bool any = false;
        for (const auto &c : results) {
            const auto *rep = c.report(info.name);
            row.push_back(rep ? (rep->passed() ? "pass" : "fail") : "-");
            any = any || rep;
        }
        if (any) {
            matrix += csv_row(row);
        }
    }
    write_text(cfg.out / "sweep_matrix.csv", matrix);

    std::string summary = csv_row({"p", "r", "max_k", "checks", "failed_checks", "v_sequence", "deviation_low",
                                   "deviation_high", "max_abs_deviation", "argmax"});
    bool ok = true;
    for (const auto &c : results) {
        std::size_t failed = 0;
        for (const auto &rep : c.reports) {
            failed += rep.passed() ? 0 : 1;
        }
        auto metric = [&](const char *check, const char *key) -> std::string {
            const auto *rep = c.report(check);
            if (!rep) {
                return "";
            }
            auto it = rep->metrics.find(key);
            return it == rep->metrics.end() ? "" : it->second;
        };
        summary += csv_row({std::to_string(c.p), std::to_string(c.r), std::to_string(c.max_k),
                            std::to_string(c.reports.size()), std::to_string(failed), metric("v_table", "v_sequence"),
                            metric("slope_27a", "deviation_low"), metric("slope_27a", "deviation_high"),
                            metric("slope_27a", "max_abs_deviation"), metric("slope_27a", "argmax")});
        std::cout << (c.passed() ? "PASS " : "FAIL ") << cell_label(c) << " K=" << c.max_k << " " << c.reports.size()
                  << " checks, " << failed << " failed\n";
        if (!c.passed()) {
            print_cell(c);
        }
        ok = ok && c.passed();
    }
    write_text(cfg.out / "sweep_summary.csv", summary);
    std::cout << "wrote " << (cfg.out / "sweep_matrix.csv").string() << " and "
              << (cfg.out / "sweep_summary.csv").string() << "\n";
    return ok ? exit_pass : exit_fail;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Coefficients of the p-adic Boettcher coordinate of x^{p^2} + p^{r+2} x^{p^2+1}"};
    app.require_subcommand(1);
    Flags compute_flags, verify_flags, sweep_flags;
    auto *compute = app.add_subcommand("compute", "Write coefficient tables as JSON");
    auto *verify = app.add_subcommand("verify", "Run checks on stored or freshly computed tables");
    auto *sweep = app.add_subcommand("sweep", "Run checks over a (p, r) grid and write summary tables");
    add_flags(compute, compute_flags);
    add_flags(verify, verify_flags);
    add_flags(sweep, sweep_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (compute->parsed()) {
            return cmd_compute(resolve_config(compute_flags));
        }
        if (verify->parsed()) {
            return cmd_verify(resolve_config(verify_flags));
        }
        return cmd_sweep(resolve_config(sweep_flags));
    } catch (const std::exception &e) {
        // Usage, configuration, file-format and guard errors all land here.
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
}
