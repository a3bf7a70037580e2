#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compressors.hpp"
#include "config.hpp"
#include "digraph.hpp"
#include "objectives.hpp"
#include "solver.hpp"

namespace rcpp {

// Concrete objects assembled from an ExperimentConfig. Construction is
// deterministic, including the empirically estimated contract constants
// of the qn/qtn compressors.
Digraph build_graph(const GraphConfig& cfg);
MixingPair build_mixing_pair(const GraphConfig& cfg);
RidgeProblem build_problem(const ProblemConfig& cfg, int agents);
Compressor build_compressor(const CompressorConfig& cfg, int dim);
SolverConfig build_solver_config(const ExperimentConfig& cfg);

struct RunSummaryRow {
    std::string algorithm;
    std::uint64_t seed = 0;
    long iterations_done = 0;
    double final_residual = 0.0;
    bool fit_ok = false;
    double c_hat = 1.0;
    double r2 = 0.0;
    std::uint64_t bits_total = 0;
    bool diverged = false;
    int pass = -1;  // 1 pass, 0 fail, -1 no residual target configured
};

struct ExperimentReport {
    std::vector<RunSummaryRow> rows;
    std::vector<std::string> warnings;
    bool any_diverged = false;
};

// Runs every (algorithm, seed) combination of the config, writing
// `<algo>_seed<seed>.csv` per run, `<algo>_mean.csv` per algorithm when
// several seeds are configured, and `summary.txt`. Seeds are distributed
// over up to `workers` threads; outputs are byte-identical for any worker
// count. Divergence is recorded per row (partial CSV kept), not thrown.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir, int workers);

std::string format_report(const ExperimentReport& report);

// Certification entry point used by the CLI: builds the operator, runs
// certify_compressor, and renders a per-scale table.
struct CertifySummary {
    Compressor compressor;
    CertifyResult result;
    std::string table;
};
CertifySummary run_certify(const std::string& kind, int dim, int bits, int k,
                           double level, long samples, std::uint64_t seed);

}  // namespace rcpp
