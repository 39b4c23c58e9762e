#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prep {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Input could not be tokenized/decoded (bad line, bad number, ...).
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input decoded fine but violates a structural contract (dangling edge,
/// duplicate id, schema mismatch, bad hyperparameter, ...).
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numeric computation produced a non-finite or otherwise unusable value.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Collects non-fatal diagnostics (skipped terms, zero weights, stalls).
using WarningList = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Small string helpers shared by the file readers.

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

inline double parse_double(const std::string& tok, const std::string& context) {
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(context + ": bad number '" + tok + "'");
    return v;
}

inline long parse_long(const std::string& tok, const std::string& context) {
    char* end = nullptr;
    errno = 0;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(context + ": bad integer '" + tok + "'");
    return v;
}

inline uint64_t parse_uint64(const std::string& tok, const std::string& context) {
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE || tok.front() == '-')
        throw ParseError(context + ": bad unsigned integer '" + tok + "'");
    return v;
}

/// Shortest decimal form that round-trips a double bit-exactly.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// FNV-1a content fingerprints, used in output headers for caching and audit.

inline uint64_t fnv1a(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string fnv1a_hex(std::string_view data) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(data)));
    return buf;
}

} // namespace prep
