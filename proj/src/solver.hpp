#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "compressors.hpp"
#include "digraph.hpp"
#include "metrics.hpp"
#include "objectives.hpp"

namespace rcpp {

// Full per-iteration state of the compressed push-pull recursion.
// Initialization: Y = grad(F)(X), all H buffers zero. Two identities hold
// at every iteration and are enforced by tests:
//   1'Y^k = 1'grad(F)(X^k)        (gradient tracking)
//   H_R = R H_x,  H_C = C H_y     (received aggregates stay consistent)
struct AlgoState {
    Eigen::MatrixXd X;     // n x p decision rows
    Eigen::MatrixXd Y;     // n x p tracker rows
    Eigen::MatrixXd H_x;   // local reference points
    Eigen::MatrixXd H_y;
    Eigen::MatrixXd H_R;   // received-aggregate references
    Eigen::MatrixXd H_C;
    Eigen::MatrixXd grad;  // grad(F)(X) at the current iterate
    long k = 0;
    bool compressed = true;  // false for the plain push-pull baseline
};

AlgoState init_state(const RidgeProblem& problem, const Eigen::MatrixXd& X0,
                     bool compressed);

struct SolverConfig {
    Eigen::VectorXd lambda;  // per-agent step sizes (diagonal of Lambda)
    double alpha_x = 0.5;    // reference-point gains, in (0, 1/r]
    double alpha_y = 0.5;
    double gamma_x = 1.0;    // consensus gains, in (0, 1]
    double gamma_y = 1.0;
    ScalingSchedule schedule;
    long iterations = 0;
    Compressor compressor;
};

// Throws on violated ranges; returns human-readable warnings for step
// sizes that exceed the usual smoothness guidance (lambda_max * L > 1 or
// lambda_bar > 1/L).
std::vector<std::string> validate_solver_config(const SolverConfig& cfg,
                                                const MixingPair& mixing,
                                                const RidgeProblem& problem);

// One compressed push-pull iteration; returns the bits transmitted this
// step (each agent's payload cost times its non-self out-degree in the
// respective graph). Throws DivergenceError on non-finite or huge iterates.
std::uint64_t rcpp_step(AlgoState& state, const RidgeProblem& problem,
                        const MixingPair& mixing, const SolverConfig& cfg,
                        std::uint64_t run_seed);

// Uncompressed baseline: X <- R(X - Lambda Y), Y <- C(Y + dgrad).
void pushpull_step(AlgoState& state, const RidgeProblem& problem,
                   const MixingPair& mixing, const SolverConfig& cfg);

struct ScheduleAdvice {
    ScalingSchedule schedule;
    double rho_tilde = 0.0;  // advisory lower bound on feasible decay rates
    bool rate_warning = false;  // schedule decays as fast as the bound allows
};

// Builds s_k^2 = c0 * rate_target^k and compares the target against the
// advisory bound max{1 - lambda_bar*mu/2, 1 - theta_R*gamma_x/16,
// 1 - theta_C*gamma_y/8, 1 - alpha_x*r*delta/4, 1 - alpha_y*r*delta/16}.
// theta_R/theta_C have no constructive recipe, so callers supply estimates.
ScheduleAdvice make_schedule(const SolverConfig& cfg, const MixingPair& mixing,
                             double mu, double rate_target,
                             double theta_R = 1.0, double theta_C = 1.0);

enum class Algorithm { kRcpp, kPushPull, kRcppStatic };

std::string to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);

struct RunResult {
    std::vector<IterationRecord> records;  // one per reached state
    bool diverged = false;
    long diverged_at = -1;
    std::string message;
};

// Runs the chosen recursion for cfg.iterations steps from X0 = 0,
// recording metrics at every state (K+1 records when all steps succeed).
// Deterministic in (cfg, algo, seed). On divergence the partial trace is
// kept and `diverged` is set; nothing is thrown.
RunResult run(const RidgeProblem& problem, const MixingPair& mixing,
              const SolverConfig& cfg, Algorithm algo, std::uint64_t seed,
              const std::function<void(const AlgoState&)>& on_step = {});

}  // namespace rcpp
