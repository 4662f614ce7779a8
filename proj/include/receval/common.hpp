#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace receval {

// Error taxonomy, mapped to CLI exit codes (usage=1, data=2, endpoint=3).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EndpointError : std::runtime_error {
    bool retryable = false;
    explicit EndpointError(const std::string& msg, bool retry = false)
        : std::runtime_error(msg), retryable(retry) {}
};

// FNV-1a. std::hash is not stable across implementations; seeds derived from
// string ids must be identical on every platform.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// splitmix64, used to decorrelate (run seed, user id) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string trim(std::string_view s);
std::vector<std::string> split_tabs(std::string_view line);
std::vector<std::string> split_whitespace(std::string_view line);

// lowercase + trim + collapse internal whitespace
std::string normalize_text(std::string_view s);

// Fixed-precision decimal used in reports (4 d.p.).
std::string format_fixed(double v, int decimals = 4);

// Shortest round-trippable representation, stable across runs.
std::string format_double(double v);

}  // namespace receval
