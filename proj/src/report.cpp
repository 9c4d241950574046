#include "dichoteq/report.hpp"

#include <charconv>
#include <cstring>

namespace dichoteq {

bool VerificationReport::all_passed() const {
    for (const CheckRow& r : rows)
        if (!r.passed) return false;
    return true;
}

double VerificationReport::worst_excess() const {
    double worst = 0.0;
    for (const CheckRow& r : rows) {
        if (r.passed) continue;
        const double denom = r.bound != 0.0 ? std::abs(r.bound) : 1.0;
        worst = std::max(worst, (r.measured - r.bound) / denom);
    }
    return worst;
}

void VerificationReport::append(const VerificationReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    for (auto it = other.extra.begin(); it != other.extra.end(); ++it) extra[it.key()] = *it;
}

void VerificationReport::write_csv(std::ostream& os) const {
    os << "check_name,n,m,argument_hash,measured,bound,passed\n";
    for (const CheckRow& r : rows) {
        os << r.check << ',' << r.n << ',' << r.m << ',' << r.arg_hash << ','
           << format_double(r.measured) << ',' << format_double(r.bound) << ','
           << (r.passed ? "true" : "false") << '\n';
    }
}

nlohmann::json VerificationReport::summary() const {
    nlohmann::json j;
    j["title"] = title;
    j["checks_total"] = rows.size();
    size_t failed = 0;
    for (const CheckRow& r : rows)
        if (!r.passed) ++failed;
    j["checks_failed"] = failed;
    j["passed"] = failed == 0;
    if (!extra.is_null()) j["detail"] = extra;
    return j;
}

namespace {

uint64_t fnv1a(const unsigned char* data, size_t len) {
    uint64_t h = 1469598103934665603ull;
    for (size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_doubles(const double* data, size_t count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    const uint64_t h = fnv1a(bytes, count * sizeof(double));
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
    buf[16] = '\0';
    return std::string(buf);
}

} // namespace

std::string hash_args(const Vec& v) { return hash_doubles(v.data(), v.size()); }

std::string hash_args(std::initializer_list<double> v) {
    return hash_doubles(v.begin(), v.size());
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace dichoteq
