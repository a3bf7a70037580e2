#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace rcpp {

struct AlgoState;
class RidgeProblem;
struct MixingPair;

// Per-iteration error quantities and the communication-bit counter.
//   residual      f(xbar) - f*,  xbar = u_R'X/n
//   consensus_err ||X - 1*xbar'||_F^2
//   tracking_err  ||Y - u_C*ybar'||_F^2,  ybar = 1'Y/n
//   comp_err_x    ||Xtilde - H_x||_F^2 (0 for uncompressed algorithms)
//   comp_err_y    ||Y - H_y||_F^2      (0 for uncompressed algorithms)
// Consensus/tracking use the Frobenius norm as a computable surrogate for
// the analysis norms, which are only shown to exist.
struct IterationRecord {
    long k = 0;
    double residual = 0.0;
    double consensus_err = 0.0;
    double tracking_err = 0.0;
    double comp_err_x = 0.0;
    double comp_err_y = 0.0;
    std::uint64_t bits_cum = 0;
};

IterationRecord record_state(const AlgoState& state,
                             const RidgeProblem& problem,
                             const MixingPair& mixing,
                             const Eigen::VectorXd& lambda,
                             std::uint64_t bits_cum);

struct RateFit {
    double c_hat = 1.0;  // per-iteration contraction factor
    double r2 = 0.0;     // quality of the log-linear fit
};

// Least-squares slope of log(residual) against k after `burn_in`,
// truncated at the first point at or below the 1e-14 numerical floor.
// Returns nullopt with fewer than 10 usable points.
std::optional<RateFit> fit_rate(const std::vector<double>& residuals,
                                long burn_in);

// `k,residual,consensus_err,tracking_err,comp_err_x,comp_err_y,bits_cum`,
// floating point at 17 significant digits.
void write_trace_csv(std::ostream& out,
                     const std::vector<IterationRecord>& records);

// Same columns averaged entry-wise across seeds (rows beyond the shortest
// trace are dropped); all fields rendered as floating point.
void write_mean_trace_csv(
    std::ostream& out,
    const std::vector<std::vector<IterationRecord>>& traces);

}  // namespace rcpp
