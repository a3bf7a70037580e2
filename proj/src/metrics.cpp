#include "metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "errors.hpp"
#include "solver.hpp"

namespace rcpp {

IterationRecord record_state(const AlgoState& state,
                             const RidgeProblem& problem,
                             const MixingPair& mixing,
                             const Eigen::VectorXd& lambda,
                             std::uint64_t bits_cum) {
    const double n = static_cast<double>(problem.agents());

    IterationRecord rec;
    rec.k = state.k;
    rec.bits_cum = bits_cum;

    const Eigen::VectorXd xbar = state.X.transpose() * mixing.u_R / n;
    rec.residual = problem.value(xbar) - problem.f_star();
    rec.consensus_err =
        (state.X - Eigen::VectorXd::Ones(problem.agents()) * xbar.transpose())
            .squaredNorm();

    const Eigen::VectorXd ybar =
        state.Y.transpose() * Eigen::VectorXd::Ones(problem.agents()) / n;
    rec.tracking_err =
        (state.Y - mixing.u_C * ybar.transpose()).squaredNorm();

    if (state.compressed) {
        const Eigen::MatrixXd Xt = state.X - lambda.asDiagonal() * state.Y;
        rec.comp_err_x = (Xt - state.H_x).squaredNorm();
        rec.comp_err_y = (state.Y - state.H_y).squaredNorm();
    }
    return rec;
}

std::optional<RateFit> fit_rate(const std::vector<double>& residuals,
                                long burn_in) {
    constexpr double kFloor = 1e-14;
    std::vector<double> ks, logs;
    for (std::size_t i = static_cast<std::size_t>(std::max(burn_in, 0L));
         i < residuals.size(); ++i) {
        if (!(residuals[i] > kFloor)) break;  // truncate at the noise floor
        ks.push_back(static_cast<double>(i));
        logs.push_back(std::log(residuals[i]));
    }
    if (ks.size() < 10) return std::nullopt;

    const double m = static_cast<double>(ks.size());
    double kbar = 0.0, lbar = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        kbar += ks[i];
        lbar += logs[i];
    }
    kbar /= m;
    lbar /= m;
    double skk = 0.0, skl = 0.0, sll = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        skk += (ks[i] - kbar) * (ks[i] - kbar);
        skl += (ks[i] - kbar) * (logs[i] - lbar);
        sll += (logs[i] - lbar) * (logs[i] - lbar);
    }
    const double slope = skl / skk;

    double ss_res = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double fit = lbar + slope * (ks[i] - kbar);
        ss_res += (logs[i] - fit) * (logs[i] - fit);
    }
    RateFit out;
    out.c_hat = std::exp(slope);
    out.r2 = sll < 1e-30 ? 1.0 : 1.0 - ss_res / sll;
    return out;
}

namespace {

void append_g17(std::string& line, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += buf;
}

}  // namespace

void write_trace_csv(std::ostream& out,
                     const std::vector<IterationRecord>& records) {
    out << "k,residual,consensus_err,tracking_err,comp_err_x,comp_err_y,"
           "bits_cum\n";
    for (const auto& r : records) {
        std::string line = std::to_string(r.k);
        for (double v : {r.residual, r.consensus_err, r.tracking_err,
                         r.comp_err_x, r.comp_err_y}) {
            line += ',';
            append_g17(line, v);
        }
        line += ',';
        line += std::to_string(r.bits_cum);
        line += '\n';
        out << line;
    }
}

void write_mean_trace_csv(
    std::ostream& out,
    const std::vector<std::vector<IterationRecord>>& traces) {
    if (traces.empty()) {
        throw InvalidArgument("mean trace needs at least one run");
    }
    std::size_t len = traces.front().size();
    for (const auto& t : traces) len = std::min(len, t.size());

    out << "k,residual,consensus_err,tracking_err,comp_err_x,comp_err_y,"
           "bits_cum\n";
    const double m = static_cast<double>(traces.size());
    for (std::size_t i = 0; i < len; ++i) {
        double res = 0.0, cons = 0.0, track = 0.0, cx = 0.0, cy = 0.0,
               bits = 0.0;
        for (const auto& t : traces) {
            res += t[i].residual;
            cons += t[i].consensus_err;
            track += t[i].tracking_err;
            cx += t[i].comp_err_x;
            cy += t[i].comp_err_y;
            bits += static_cast<double>(t[i].bits_cum);
        }
        std::string line = std::to_string(traces.front()[i].k);
        for (double v : {res / m, cons / m, track / m, cx / m, cy / m,
                         bits / m}) {
            line += ',';
            append_g17(line, v);
        }
        line += '\n';
        out << line;
    }
}

}  // namespace rcpp
