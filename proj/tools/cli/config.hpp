#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsaht::cli {

/// Raised for any malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Lambda = std::array<double, 3>;

/// Exactly one of the three sources is set.
struct ChannelSource {
    std::optional<std::string> generator;
    std::optional<std::vector<std::vector<double>>> matrix;  ///< one row per (x1, x2), row-major
    std::optional<std::string> file;                         ///< whitespace-separated table, row-major

    bool operator==(const ChannelSource&) const = default;
};

struct PolicySource {
    std::string kind = "dp";  ///< dp | file | constant | seeded
    std::string file;
    std::vector<int> e1;
    std::vector<int> e2;
    std::uint64_t seed = 7;

    bool operator==(const PolicySource&) const = default;
};

struct CapsConfig {
    std::uint64_t nodes = 5'000'000;
    std::uint64_t strategies = 10'000'000;
    std::uint64_t histories = 10'000'000;
    std::uint64_t policies = 1'000'000;

    bool operator==(const CapsConfig&) const = default;
};

struct FixedPointConfig {
    std::string cost = "joint_entropy_drift";
    int grid = 20;
    std::string mode = "discounted";
    double beta = 0.9;
    double tol = 1e-10;
    int max_iter = 10'000;

    bool operator==(const FixedPointConfig&) const = default;
};

struct ExperimentConfig {
    int x1_size = 2;
    int x2_size = 2;
    int z_size = 2;
    int m1 = 2;
    int m2 = 2;
    std::string log_base = "bits";
    ChannelSource channel;
    int horizon = 1;
    std::string objective = "error_probability";
    Lambda lambda{0.0, 0.0, 1.0};
    std::vector<Lambda> lambdas;
    PolicySource policy;
    bool oracle = false;
    bool rational = false;
    CapsConfig caps;
    std::uint64_t seed = 42;
    std::uint64_t trials = 100'000;
    FixedPointConfig fixed_point;
    std::string out = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses YAML text. Relative file paths are resolved against base_dir.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// YAML text that parse_config maps back to an equal config.
std::string to_yaml(const ExperimentConfig& cfg);

/// Flattened channel table read from the configured matrix or file.
std::vector<double> channel_table(const ExperimentConfig& cfg);

}  // namespace dsaht::cli
