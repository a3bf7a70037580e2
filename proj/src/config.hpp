#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rcpp {

// Experiment description, read from an INI-style file with [section]
// headers and `key = value` lines ('#' starts a comment). Every field has
// a documented default; unknown sections or keys are reported as errors,
// and parsing collects every problem rather than stopping at the first.
struct GraphConfig {
    std::string kind = "ring";
    int n = 20;
    int extra_edges = 20;
    std::uint64_t seed = 7;
    double perturb = 0.5;  // amplitude of the random weight perturbation

    bool operator==(const GraphConfig&) const = default;
};

struct ProblemConfig {
    int p = 10;
    double rho = 0.1;
    double noise = 0.1;
    std::uint64_t seed = 42;

    bool operator==(const ProblemConfig&) const = default;
};

struct AlgorithmConfig {
    std::vector<std::string> names = {"rcpp"};
    std::vector<double> lambda = {0.02};  // scalar applies to every agent
    double alpha_x = 0.5;
    double alpha_y = 0.5;
    double gamma_x = 0.8;
    double gamma_y = 0.8;
    double c0 = 1.0;
    double c = 0.995;
    long iterations = 5000;

    bool operator==(const AlgorithmConfig&) const = default;
};

struct CompressorConfig {
    std::string kind = "qn";
    int b = 2;
    int k = 4;
    double level = 1.0;

    bool operator==(const CompressorConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    bool directory_explicit = false;  // set when the file/override names it
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    long fit_burn_in = -1;  // -1: iterations/10
    bool has_residual_target = true;
    double residual_target = 1e-8;

    bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
    GraphConfig graph;
    ProblemConfig problem;
    AlgorithmConfig algorithm;
    CompressorConfig compressor;
    OutputConfig output;

    bool operator==(const ExperimentConfig&) const = default;
};

// Raw parse: starts from defaults, applies the file, appends one issue
// string per problem (with line numbers). Does not cross-validate.
ExperimentConfig parse_config_text(std::istream& in,
                                   std::vector<std::string>& issues);

// Applies one `section.key=value` override; throws InvalidArgument on an
// unknown key or unparsable value.
void apply_override(ExperimentConfig& cfg, const std::string& dotted_key,
                    const std::string& value);

// Cross-field validation; returns one message per violation (empty = ok).
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

// Parse + validate; throws ParseError carrying every issue found.
ExperimentConfig parse_config(const std::string& path);

// Canonical rendering; parse_config_text of this text reproduces `cfg`.
std::string canonical_config(const ExperimentConfig& cfg);

}  // namespace rcpp
