#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attackmap {

/// 64-bit FNV-1a digest rendered as 16 lowercase hex digits. Each string
/// added is followed by its length, so field boundaries matter.
class Fingerprint {
public:
    Fingerprint& add(std::string_view bytes);
    Fingerprint& add(std::uint64_t value);
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fingerprint_of(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Shortest-safe decimal rendering with 17 significant digits; parses back
/// bit-exactly with `parse_decimal`.
std::string format_decimal(double value);
double parse_decimal(std::string_view text);

std::vector<std::string> format_decimals(std::span<const double> values);
std::vector<double> parse_decimals(const std::vector<std::string>& texts);

/// Seeded random source. Only the engine's raw output is used, so results
/// do not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Appends one RFC 4180 field, quoting only when needed.
void append_csv_field(std::string& out, std::string_view field);

std::string trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);

}  // namespace attackmap
