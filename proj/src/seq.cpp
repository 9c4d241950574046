#include "dichoteq/seq.hpp"

#include <algorithm>
#include <cmath>

#include "dichoteq/errors.hpp"

namespace dichoteq {

Seq::Seq() : mode_(Mode::constant), c_(0.0), eval_([](int) { return 0.0; }) {}

Seq Seq::constant(double v) {
    Seq s;
    s.mode_ = Mode::constant;
    s.c_ = v;
    s.eval_ = [v](int) { return v; };
    return s;
}

Seq Seq::table(int first_index, std::vector<double> values) {
    if (values.empty()) throw InvalidParams("sequence table must not be empty");
    Seq s;
    s.mode_ = Mode::table;
    s.first_ = first_index;
    s.values_ = std::move(values);
    const int first = s.first_;
    const auto vals = s.values_; // copy captured by the closure
    s.eval_ = [first, vals](int n) {
        long i = static_cast<long>(n) - first;
        if (i < 0) i = 0;
        if (i >= static_cast<long>(vals.size())) i = static_cast<long>(vals.size()) - 1;
        return vals[static_cast<size_t>(i)];
    };
    return s;
}

Seq Seq::reciprocal(double c) {
    Seq s;
    s.mode_ = Mode::reciprocal;
    s.c_ = c;
    s.eval_ = [c](int n) { return c / (1.0 + std::abs(n)); };
    return s;
}

Seq Seq::from_function(std::function<double(int)> f) {
    Seq s;
    s.mode_ = Mode::function;
    s.eval_ = std::move(f);
    return s;
}

double Seq::max_on(int lo, int hi) const {
    double best = eval_(lo);
    for (int n = lo + 1; n <= hi; ++n) best = std::max(best, eval_(n));
    return best;
}

double Seq::min_on(int lo, int hi) const {
    double best = eval_(lo);
    for (int n = lo + 1; n <= hi; ++n) best = std::min(best, eval_(n));
    return best;
}

nlohmann::json Seq::to_json() const {
    switch (mode_) {
    case Mode::constant:
        return {{"mode", "constant"}, {"value", c_}};
    case Mode::table:
        return {{"mode", "table"}, {"first_index", first_}, {"values", values_}};
    case Mode::reciprocal:
        return {{"mode", "reciprocal"}, {"c", c_}};
    case Mode::function:
        break;
    }
    throw InvalidParams("function-backed sequence is not serializable");
}

Seq Seq::from_json(const nlohmann::json& j) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "constant") return constant(j.at("value").get<double>());
    if (mode == "table")
        return table(j.at("first_index").get<int>(), j.at("values").get<std::vector<double>>());
    if (mode == "reciprocal") return reciprocal(j.at("c").get<double>());
    throw ConfigError("unknown sequence mode '" + mode + "'");
}

Seq max_seq(const Seq& a, const Seq& b) {
    return Seq::from_function([a, b](int n) { return std::max(a(n), b(n)); });
}

Seq add_seq(const Seq& a, const Seq& b) {
    return Seq::from_function([a, b](int n) { return a(n) + b(n); });
}

} // namespace dichoteq
