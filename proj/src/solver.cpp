#include "solver.hpp"

#include <cmath>

#include "errors.hpp"

namespace rcpp {

AlgoState init_state(const RidgeProblem& problem, const Eigen::MatrixXd& X0,
                     bool compressed) {
    if (X0.rows() != problem.agents() || X0.cols() != problem.dim()) {
        throw InvalidArgument("initial state shape mismatch");
    }
    AlgoState st;
    st.X = X0;
    st.grad = problem.batch_gradient(st.X);
    st.Y = st.grad;
    st.H_x = Eigen::MatrixXd::Zero(X0.rows(), X0.cols());
    st.H_y = st.H_x;
    st.H_R = st.H_x;
    st.H_C = st.H_x;
    st.k = 0;
    st.compressed = compressed;
    return st;
}

std::vector<std::string> validate_solver_config(const SolverConfig& cfg,
                                                const MixingPair& mixing,
                                                const RidgeProblem& problem) {
    const int n = problem.agents();
    if (cfg.lambda.size() != n) {
        throw InvalidArgument("lambda must have one entry per agent (" +
                              std::to_string(n) + "), got " +
                              std::to_string(cfg.lambda.size()));
    }
    if ((cfg.lambda.array() <= 0.0).any()) {
        throw InvalidArgument("all step sizes must be positive");
    }
    const double inv_r = 1.0 / cfg.compressor.r;
    if (!(cfg.alpha_x > 0.0) || cfg.alpha_x > inv_r) {
        throw InvalidArgument("alpha_x must be in (0, 1/r] = (0, " +
                              std::to_string(inv_r) + "]");
    }
    if (!(cfg.alpha_y > 0.0) || cfg.alpha_y > inv_r) {
        throw InvalidArgument("alpha_y must be in (0, 1/r] = (0, " +
                              std::to_string(inv_r) + "]");
    }
    if (!(cfg.gamma_x > 0.0) || cfg.gamma_x > 1.0) {
        throw InvalidArgument("gamma_x must be in (0, 1]");
    }
    if (!(cfg.gamma_y > 0.0) || cfg.gamma_y > 1.0) {
        throw InvalidArgument("gamma_y must be in (0, 1]");
    }
    if (!(cfg.schedule.c0 > 0.0)) {
        throw InvalidArgument("schedule c0 must be positive");
    }
    if (!(cfg.schedule.c > 0.0) || cfg.schedule.c > 1.0) {
        throw InvalidArgument("schedule decay c must be in (0, 1]");
    }
    if (cfg.iterations < 0) {
        throw InvalidArgument("iteration budget must be nonnegative");
    }
    if (cfg.compressor.dim != problem.dim()) {
        throw InvalidArgument("compressor dimension " +
                              std::to_string(cfg.compressor.dim) +
                              " does not match problem dimension " +
                              std::to_string(problem.dim()));
    }
    if (mixing.R.rows() != n) {
        throw InvalidArgument("mixing matrices sized for " +
                              std::to_string(mixing.R.rows()) +
                              " agents, problem has " + std::to_string(n));
    }

    std::vector<std::string> warnings;
    const double L = problem.smoothness();
    const double lambda_hat = cfg.lambda.maxCoeff();
    const double lambda_bar =
        mixing.u_R.dot(cfg.lambda.asDiagonal() * mixing.u_C) / n;
    if (lambda_hat * L > 1.0) {
        warnings.push_back("largest step size " + std::to_string(lambda_hat) +
                           " exceeds 1/L = " + std::to_string(1.0 / L) +
                           "; expect slow or unstable runs");
    }
    if (lambda_bar > 1.0 / L) {
        warnings.push_back("weighted step size " + std::to_string(lambda_bar) +
                           " exceeds 1/L = " + std::to_string(1.0 / L));
    }
    return warnings;
}

namespace {

void check_finite(const AlgoState& st) {
    const bool bad = !st.X.allFinite() || !st.Y.allFinite() ||
                     st.X.norm() > 1e12;
    if (bad) {
        throw DivergenceError("iterates diverged at iteration " +
                                  std::to_string(st.k),
                              st.k);
    }
}

std::vector<int> transmit_degrees(const Digraph& g) {
    std::vector<int> deg(g.node_count(), 0);
    for (const auto& [i, j] : g.edges()) {
        if (i != j) ++deg[i];
    }
    return deg;
}

}  // namespace

std::uint64_t rcpp_step(AlgoState& st, const RidgeProblem& problem,
                        const MixingPair& mixing, const SolverConfig& cfg,
                        std::uint64_t run_seed) {
    const int n = problem.agents();
    const int p = problem.dim();
    const double s = cfg.schedule.at(st.k);
    const auto deg_R = transmit_degrees(mixing.graph_R);
    const auto deg_C = transmit_degrees(mixing.graph_C);
    std::uint64_t bits = 0;

    // Decision half: compress the difference to the reference point,
    // communicate through R, then take the damped consensus step.
    const Eigen::MatrixXd Xt = st.X - cfg.lambda.asDiagonal() * st.Y;
    Eigen::MatrixXd Qx(n, p);
    for (int i = 0; i < n; ++i) {
        CounterRng rng(run_seed, static_cast<std::uint64_t>(st.k),
                       static_cast<std::uint64_t>(i), Stream::kCompressX);
        const Eigen::VectorXd arg = (Xt.row(i) - st.H_x.row(i)).transpose() / s;
        Qx.row(i) = s * cfg.compressor.apply(arg, rng).transpose();
        bits += cfg.compressor.bit_cost(arg) *
                static_cast<std::uint64_t>(deg_R[i]);
    }
    const Eigen::MatrixXd Xhat = st.H_x + Qx;
    const Eigen::MatrixXd XhatR = st.H_R + mixing.R * Qx;
    st.H_x = (1.0 - cfg.alpha_x) * st.H_x + cfg.alpha_x * Xhat;
    st.H_R = (1.0 - cfg.alpha_x) * st.H_R + cfg.alpha_x * XhatR;
    st.X = Xt - cfg.gamma_x * (Xhat - XhatR);

    // Tracker half: mirror steps through C on the gradient increments.
    const Eigen::MatrixXd grad_next = problem.batch_gradient(st.X);
    const Eigen::MatrixXd Yt = st.Y + grad_next - st.grad;
    Eigen::MatrixXd Qy(n, p);
    for (int i = 0; i < n; ++i) {
        CounterRng rng(run_seed, static_cast<std::uint64_t>(st.k),
                       static_cast<std::uint64_t>(i), Stream::kCompressY);
        const Eigen::VectorXd arg = (Yt.row(i) - st.H_y.row(i)).transpose() / s;
        Qy.row(i) = s * cfg.compressor.apply(arg, rng).transpose();
        bits += cfg.compressor.bit_cost(arg) *
                static_cast<std::uint64_t>(deg_C[i]);
    }
    const Eigen::MatrixXd Yhat = st.H_y + Qy;
    const Eigen::MatrixXd YhatC = st.H_C + mixing.C * Qy;
    st.H_y = (1.0 - cfg.alpha_y) * st.H_y + cfg.alpha_y * Yhat;
    st.H_C = (1.0 - cfg.alpha_y) * st.H_C + cfg.alpha_y * YhatC;
    st.Y = Yt - cfg.gamma_y * (Yhat - YhatC);

    st.grad = grad_next;
    ++st.k;
    check_finite(st);
    return bits;
}

void pushpull_step(AlgoState& st, const RidgeProblem& problem,
                   const MixingPair& mixing, const SolverConfig& cfg) {
    st.X = mixing.R * (st.X - cfg.lambda.asDiagonal() * st.Y);
    const Eigen::MatrixXd grad_next = problem.batch_gradient(st.X);
    st.Y = mixing.C * (st.Y + grad_next - st.grad);
    st.grad = grad_next;
    ++st.k;
    check_finite(st);
}

ScheduleAdvice make_schedule(const SolverConfig& cfg, const MixingPair& mixing,
                             double mu, double rate_target, double theta_R,
                             double theta_C) {
    if (!(rate_target > 0.0) || rate_target > 1.0) {
        throw InvalidArgument("rate target must be in (0, 1], got " +
                              std::to_string(rate_target));
    }
    const double n = static_cast<double>(mixing.R.rows());
    const double lambda_bar =
        mixing.u_R.dot(cfg.lambda.asDiagonal() * mixing.u_C) / n;
    const double ard_x = cfg.alpha_x * cfg.compressor.r * cfg.compressor.delta;
    const double ard_y = cfg.alpha_y * cfg.compressor.r * cfg.compressor.delta;
    // M*lambda_hat = lambda_bar by the definition of M.
    const double rho_tilde =
        std::max({1.0 - 0.5 * lambda_bar * mu, 1.0 - theta_R * cfg.gamma_x / 16.0,
                  1.0 - theta_C * cfg.gamma_y / 8.0, 1.0 - ard_x / 4.0,
                  1.0 - ard_y / 16.0});

    ScheduleAdvice advice;
    advice.schedule.c0 = cfg.schedule.c0;
    advice.schedule.c = rate_target;
    advice.rho_tilde = rho_tilde;
    advice.rate_warning = rate_target <= rho_tilde && rate_target < 1.0;
    return advice;
}

std::string to_string(Algorithm algo) {
    switch (algo) {
        case Algorithm::kRcpp: return "rcpp";
        case Algorithm::kPushPull: return "pushpull";
        case Algorithm::kRcppStatic: return "rcpp_static";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "rcpp") return Algorithm::kRcpp;
    if (name == "pushpull") return Algorithm::kPushPull;
    if (name == "rcpp_static") return Algorithm::kRcppStatic;
    throw InvalidArgument("unknown algorithm '" + name +
                          "'; choices: rcpp, pushpull, rcpp_static");
}

RunResult run(const RidgeProblem& problem, const MixingPair& mixing,
              const SolverConfig& cfg, Algorithm algo, std::uint64_t seed,
              const std::function<void(const AlgoState&)>& on_step) {
    SolverConfig effective = cfg;
    if (algo == Algorithm::kRcppStatic) {
        effective.schedule.c = 1.0;  // hold s_k at sqrt(c0)
    }

    const Eigen::MatrixXd X0 =
        Eigen::MatrixXd::Zero(problem.agents(), problem.dim());
    AlgoState st = init_state(problem, X0, algo != Algorithm::kPushPull);

    // The uncompressed baseline ships raw 64-bit rows over every non-self
    // edge of both graphs each iteration.
    std::uint64_t raw_edges = 0;
    for (const auto& [i, j] : mixing.graph_R.edges()) {
        if (i != j) ++raw_edges;
    }
    for (const auto& [i, j] : mixing.graph_C.edges()) {
        if (i != j) ++raw_edges;
    }
    const std::uint64_t pushpull_step_bits =
        raw_bit_cost(problem.dim()) * raw_edges;

    RunResult result;
    std::uint64_t bits = 0;
    result.records.push_back(
        record_state(st, problem, mixing, effective.lambda, bits));
    if (on_step) on_step(st);

    for (long k = 0; k < effective.iterations; ++k) {
        try {
            if (algo == Algorithm::kPushPull) {
                pushpull_step(st, problem, mixing, effective);
                bits += pushpull_step_bits;
            } else {
                bits += rcpp_step(st, problem, mixing, effective, seed);
            }
        } catch (const DivergenceError& e) {
            result.diverged = true;
            result.diverged_at = e.iteration();
            result.message = e.what();
            break;
        }
        result.records.push_back(
            record_state(st, problem, mixing, effective.lambda, bits));
        if (on_step) on_step(st);
    }
    return result;
}

}  // namespace rcpp
