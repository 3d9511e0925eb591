#pragma once

// Coefficient tables as JSON, check reports as CSV.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <boettcher/padic.hpp>
#include <boettcher/report.hpp>
#include <boettcher/solver.hpp>

namespace boettcher {

/// Unreadable or malformed coefficient file.
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int table_format_version = 1;

inline std::string table_file_name(std::uint64_t p, std::uint64_t r)
{
    return "coeffs_p" + std::to_string(p) + "_r" + std::to_string(r) + ".json";
}

inline std::string report_file_name(std::uint64_t p, std::uint64_t r)
{
    return "report_p" + std::to_string(p) + "_r" + std::to_string(r) + ".csv";
}

inline nlohmann::json table_to_json(const CoefficientTable &table)
{
    nlohmann::json coeffs = nlohmann::json::array();
    for (std::uint64_t k = 0; k <= table.max_k(); ++k) {
        const auto &a = table.a(k);
        coeffs.push_back({{"k", k}, {"numerator", a.get_num().get_str()}, {"denominator", a.get_den().get_str()}});
    }
    return {{"format_version", table_format_version},
            {"p", table.params().p},
            {"r", table.params().r},
            {"max_k", table.max_k()},
            {"coefficients", std::move(coeffs)}};
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
inline std::string table_to_string(const CoefficientTable &table)
{
    return table_to_json(table).dump(2) + "\n";
}

namespace detail {

inline BigInt parse_decimal(const nlohmann::json &j, const std::string &what)
{
    if (!j.is_string()) {
        throw format_error(what + " must be a decimal string");
    }
    const auto &s = j.get_ref<const std::string &>();
    BigInt v;
    if (s.empty() || v.set_str(s, 10) != 0) {
        throw format_error(what + " is not a decimal integer: \"" + s + "\"");
    }
    return v;
}

inline std::uint64_t parse_count(const nlohmann::json &obj, const char *key)
{
    if (!obj.contains(key) || !obj[key].is_number_unsigned()) {
        throw format_error(std::string("field \"") + key + "\" missing or not a nonnegative integer");
    }
    return obj[key].get<std::uint64_t>();
}

} // namespace detail

inline CoefficientTable table_from_json(const nlohmann::json &j)
{
    if (!j.is_object()) {
        throw format_error("coefficient file must hold a JSON object");
    }
    if (!j.contains("format_version") || j["format_version"] != table_format_version) {
        throw format_error("unsupported format_version");
    }
    const auto p = detail::parse_count(j, "p");
    const auto r = detail::parse_count(j, "r");
    const auto max_k = detail::parse_count(j, "max_k");
    if (!j.contains("coefficients") || !j["coefficients"].is_array()) {
        throw format_error("field \"coefficients\" missing or not an array");
    }
    const auto &coeffs = j["coefficients"];
    if (coeffs.size() != max_k + 1) {
        throw format_error("expected " + std::to_string(max_k + 1) + " coefficient records, found " +
                           std::to_string(coeffs.size()));
    }
    std::vector<BigRational> a;
    a.reserve(coeffs.size());
    for (std::uint64_t k = 0; k <= max_k; ++k) {
        const auto &rec = coeffs[k];
        if (!rec.is_object() || detail::parse_count(rec, "k") != k) {
            throw format_error("coefficient record " + std::to_string(k) + " is out of order");
        }
        const auto where = "a_" + std::to_string(k);
        auto num = detail::parse_decimal(rec.value("numerator", nlohmann::json()), where + " numerator");
        auto den = detail::parse_decimal(rec.value("denominator", nlohmann::json()), where + " denominator");
        if (den <= 0) {
            throw format_error(where + " denominator must be positive");
        }
        BigRational x(num, den);
        x.canonicalize();
        if (x.get_den() != den) {
            throw format_error(where + " is not in lowest terms");
        }
        a.push_back(std::move(x));
    }
    try {
        return CoefficientTable::from_coefficients(FamilyParams::make(p, r), std::move(a));
    } catch (const usage_error &e) {
        throw format_error(e.what());
    }
}

inline CoefficientTable table_from_string(const std::string &text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw format_error(std::string("invalid JSON: ") + e.what());
    }
    return table_from_json(j);
}

inline void save_table(const CoefficientTable &table, const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw format_error("cannot write " + path.string());
    }
    out << table_to_string(table);
    if (!out) {
        throw format_error("write failed: " + path.string());
    }
}

inline CoefficientTable load_table(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw format_error("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return table_from_string(buf.str());
    } catch (const format_error &e) {
        throw format_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

inline std::string csv_row(const std::vector<std::string> &fields)
{
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        line += (i ? "," : "") + csv_field(fields[i]);
    }
    return line + "\n";
}

inline const std::vector<std::string> &report_columns()
{
    static const std::vector<std::string> cols{"check_name", "p", "r", "index", "expected", "actual", "pass"};
    return cols;
}

/// One row per witness; check_name is "name/tag" for tagged witnesses.
inline std::string reports_to_csv(const std::vector<CheckReport> &reports)
{
    std::string out = csv_row(report_columns());
    for (const auto &rep : reports) {
        for (const auto &w : rep.witnesses) {
            out += csv_row({w.tag.empty() ? rep.name : rep.name + "/" + w.tag, std::to_string(rep.p),
                            std::to_string(rep.r), std::to_string(w.index), w.expected, w.actual,
                            w.pass ? "true" : "false"});
        }
    }
    return out;
}

inline void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw format_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw format_error("write failed: " + path.string());
    }
}

} // namespace boettcher
