#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dichoteq/linalg.hpp"

namespace dichoteq {

/// One verified property instance. `bound` is the value `measured` was
/// compared against; rows with no natural (n, m) leave them at 0.
struct CheckRow {
    std::string check;
    int n = 0;
    int m = 0;
    std::string arg_hash;
    double measured = 0.0;
    double bound = 0.0;
    bool passed = true;
};

struct VerificationReport {
    std::string title;
    std::vector<CheckRow> rows;
    nlohmann::json extra; // free-form per-report summary fields

    bool all_passed() const;
    /// Worst measured/bound excess among failing rows (0 when all pass).
    double worst_excess() const;
    void append(const VerificationReport& other);

    void write_csv(std::ostream& os) const;
    nlohmann::json summary() const;
};

/// FNV-1a over the raw bytes of the doubles; stable across runs.
std::string hash_args(const Vec& v);
std::string hash_args(std::initializer_list<double> v);

/// Repeatable formatting for CSV payloads: shortest round-trip decimal,
/// '.' separator.
std::string format_double(double v);

} // namespace dichoteq
