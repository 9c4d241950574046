#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dichoteq {

/// Scalar sequence over the integers. Three closed forms serialize to JSON
/// ("constant", "table", "reciprocal"); arbitrary callables are supported in
/// memory but cannot round-trip through JSON. Table lookups clamp to the edge
/// values: sequences are frozen at the boundary outside their tabulated range.
class Seq {
public:
    Seq(); // zero sequence

    static Seq constant(double v);
    /// values[i] is the entry at index first_index + i.
    static Seq table(int first_index, std::vector<double> values);
    /// c / (1 + |n|): the decay profile of the diagonal example family.
    static Seq reciprocal(double c);
    static Seq from_function(std::function<double(int)> f);

    double operator()(int n) const { return eval_(n); }

    /// Max over [lo, hi].
    double max_on(int lo, int hi) const;
    /// Min over [lo, hi].
    double min_on(int lo, int hi) const;

    bool serializable() const { return mode_ != Mode::function; }
    nlohmann::json to_json() const;
    static Seq from_json(const nlohmann::json& j);

private:
    enum class Mode { constant, table, reciprocal, function };

    Mode mode_ = Mode::function;
    double c_ = 0.0;
    int first_ = 0;
    std::vector<double> values_;
    std::function<double(int)> eval_;
};

/// Pointwise maximum of two sequences.
Seq max_seq(const Seq& a, const Seq& b);
/// Pointwise sum.
Seq add_seq(const Seq& a, const Seq& b);

} // namespace dichoteq
