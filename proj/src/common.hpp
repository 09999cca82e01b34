#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace buildflex {

// Error taxonomy shared by the whole library. The C API maps ErrorKind
// onto its status codes, the CLI maps it onto exit codes.
enum class ErrorKind {
    invalid_argument,
    io,
    parse,
    validation,
    numeric,
    internal,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

// Shortest round-trip decimal representation. Used everywhere a double is
// written to CSV/JSON so that rerunning a command reproduces files byte for
// byte and ingest->serialize->ingest round-trips are bit exact.
std::string format_double(double value);

// Strict double parser: the whole token must be consumed.
bool parse_double(std::string_view token, double& out);

// FNV-1a, used for the config hash recorded in report headers.
std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value);

// Deterministic random helpers. std::mt19937_64 is seeded explicitly and the
// distributions are implemented here because the standard distribution
// objects are not pinned across library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), n > 0. Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t n);

    // Standard normal, Box-Muller with a cached spare.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Derive an independent stream for a named sub-task.
    Rng fork(std::uint64_t salt) const;

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace buildflex
