#include <cmath>
#include <sstream>

#include "doctest.h"
#include "metrics.hpp"
#include "oracles.hpp"
#include "solver.hpp"

using rcpp::Algorithm;
using rcpp::AlgoState;
using rcpp::CompressorKind;
using rcpp::IterationRecord;
using rcpp::MixingPair;
using rcpp::RidgeProblem;
using rcpp::SolverConfig;

namespace {

MixingPair symmetric_pair(int n, std::uint64_t seed) {
    const rcpp::Digraph g = rcpp::make_ring(n, 0, seed);
    return rcpp::build_mixing(g, g, seed, 0.0);
}

}  // namespace

TEST_CASE("record of a consensual optimal state is all zeros") {
    const RidgeProblem prob = RidgeProblem::generate(4, 3, 0.1, 0.1, 13);
    const MixingPair mixing = symmetric_pair(4, 5);
    const Eigen::MatrixXd X0 =
        Eigen::VectorXd::Ones(4) * prob.x_star().transpose();
    const AlgoState st = rcpp::init_state(prob, X0, false);
    const Eigen::VectorXd lambda = Eigen::VectorXd::Constant(4, 0.1);
    const IterationRecord rec = rcpp::record_state(st, prob, mixing, lambda, 0);
    CHECK(std::abs(rec.residual) < 1e-12);
    CHECK(rec.consensus_err < 1e-12);
    CHECK(rec.comp_err_x == 0.0);
    CHECK(rec.comp_err_y == 0.0);
}

TEST_CASE("consensual states have zero consensus error regardless of value") {
    const RidgeProblem prob = RidgeProblem::generate(4, 3, 0.1, 0.1, 19);
    const MixingPair mixing = symmetric_pair(4, 7);
    Eigen::VectorXd any(3);
    any << 2.0, -1.0, 0.5;
    AlgoState st = rcpp::init_state(
        prob, Eigen::VectorXd::Ones(4) * any.transpose(), false);
    const IterationRecord rec = rcpp::record_state(
        st, prob, mixing, Eigen::VectorXd::Constant(4, 0.1), 0);
    CHECK(rec.consensus_err < 1e-24);
}

TEST_CASE("two-agent consensus error computed by hand") {
    // X = [(1,0); (0,1)], u_R = (1,1): xbar = (0.5, 0.5) and
    // ||X - 1 xbar'||_F^2 = 4 * 0.25 = 1.
    Eigen::MatrixXd U(2, 2);
    U << 1.0, 0.0, 0.0, 1.0;
    const RidgeProblem prob =
        RidgeProblem::from_data(U, Eigen::VectorXd::Zero(2), 0.1, 0);
    const MixingPair mixing = symmetric_pair(2, 3);
    CHECK((mixing.u_R - Eigen::VectorXd::Ones(2)).norm() < 1e-9);

    AlgoState st = rcpp::init_state(prob, U, false);  // X = I
    const IterationRecord rec = rcpp::record_state(
        st, prob, mixing, Eigen::VectorXd::Constant(2, 0.1), 17);
    CHECK(rec.consensus_err == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec.bits_cum == 17);
}

TEST_CASE("residual matches an independent objective evaluation") {
    const RidgeProblem prob = RidgeProblem::generate(6, 4, 0.1, 0.1, 37);
    const MixingPair mixing = symmetric_pair(6, 11);
    SolverConfig cfg;
    cfg.lambda = Eigen::VectorXd::Constant(6, 0.02);
    cfg.schedule = {1.0, 0.995};
    cfg.iterations = 25;
    cfg.compressor =
        rcpp::make_compressor(CompressorKind::kQn, prob.dim(), 2, 1, 1.0);
    const auto result = rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 1);

    AlgoState st = rcpp::init_state(
        prob, Eigen::MatrixXd::Zero(6, 4), true);
    for (long k = 0; k < cfg.iterations; ++k) {
        rcpp::rcpp_step(st, prob, mixing, cfg, 1);
    }
    const Eigen::VectorXd xbar = st.X.transpose() * mixing.u_R / 6.0;
    const double independent =
        oracle::ridge_value_by_loop(prob, xbar) - prob.f_star();
    CHECK(std::abs(result.records.back().residual - independent) < 1e-12);
}

TEST_CASE("rate fitting on synthetic series") {
    std::vector<double> geo;
    for (int k = 0; k < 60; ++k) geo.push_back(std::pow(0.5, k));
    auto fit = rcpp::fit_rate(geo, 0);
    REQUIRE(fit.has_value());
    CHECK(fit->c_hat == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit->r2 == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> noisy;
    for (int k = 0; k < 200; ++k) {  // stays above the 1e-14 floor
        noisy.push_back(std::pow(0.9, k) * (1.0 + 0.01 * std::sin(k)));
    }
    fit = rcpp::fit_rate(noisy, 10);
    REQUIRE(fit.has_value());
    CHECK(fit->c_hat > 0.89);
    CHECK(fit->c_hat < 0.91);

    const std::vector<double> constant(50, 0.25);
    fit = rcpp::fit_rate(constant, 0);
    REQUIRE(fit.has_value());
    CHECK(fit->c_hat == doctest::Approx(1.0));

    const std::vector<double> short_series(5, 0.1);
    CHECK_FALSE(rcpp::fit_rate(short_series, 0).has_value());
    CHECK_FALSE(rcpp::fit_rate(geo, 55).has_value());

    // Scale invariance.
    std::vector<double> scaled = noisy;
    for (double& v : scaled) v *= 1000.0;
    const auto fit_scaled = rcpp::fit_rate(scaled, 10);
    REQUIRE(fit_scaled.has_value());
    CHECK(fit_scaled->c_hat ==
          doctest::Approx(rcpp::fit_rate(noisy, 10)->c_hat).epsilon(1e-12));

    // Truncation at the floor: appending junk below 1e-14 changes nothing.
    std::vector<double> with_floor = geo;
    for (int k = 0; k < 30; ++k) with_floor.push_back(1e-16);
    const auto fit_floor = rcpp::fit_rate(with_floor, 0);
    REQUIRE(fit_floor.has_value());
    CHECK(fit_floor->c_hat == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("trace csv format") {
    std::vector<IterationRecord> recs(2);
    recs[0].k = 0;
    recs[0].residual = 1.0;
    recs[0].bits_cum = 0;
    recs[1].k = 1;
    recs[1].residual = 0.125;
    recs[1].consensus_err = 0.25;
    recs[1].tracking_err = 2.0;
    recs[1].comp_err_x = 0.5;
    recs[1].comp_err_y = 4.0;
    recs[1].bits_cum = 640;

    std::stringstream ss;
    rcpp::write_trace_csv(ss, recs);
    std::string line;
    std::getline(ss, line);
    CHECK(line ==
          "k,residual,consensus_err,tracking_err,comp_err_x,comp_err_y,"
          "bits_cum");
    std::getline(ss, line);
    CHECK(line == "0,1,0,0,0,0,0");
    std::getline(ss, line);
    CHECK(line == "1,0.125,0.25,2,0.5,4,640");

    // 17 significant digits survive the round trip.
    std::vector<IterationRecord> precise(1);
    precise[0].residual = 0.1234567890123456789;
    std::stringstream ps;
    rcpp::write_trace_csv(ps, precise);
    std::getline(ps, line);
    std::getline(ps, line);
    const auto comma = line.find(',');
    const double back = std::stod(line.substr(comma + 1));
    CHECK(back == precise[0].residual);
}

TEST_CASE("mean trace averages across seeds") {
    std::vector<std::vector<IterationRecord>> traces(2);
    for (int s = 0; s < 2; ++s) {
        for (int k = 0; k < 3; ++k) {
            IterationRecord r;
            r.k = k;
            r.residual = s + 1.0;
            r.bits_cum = static_cast<std::uint64_t>(10 * (s + 1));
            traces[s].push_back(r);
        }
    }
    traces[1].pop_back();  // shorter trace truncates the mean
    std::stringstream ss;
    rcpp::write_mean_trace_csv(ss, traces);
    std::string line;
    std::getline(ss, line);
    std::getline(ss, line);
    CHECK(line == "0,1.5,0,0,0,0,15");
    int rows = 1;
    while (std::getline(ss, line) && !line.empty()) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("compression errors vanish along a converged decaying-scale run") {
    const RidgeProblem prob = RidgeProblem::generate(6, 4, 0.1, 0.1, 53);
    const rcpp::Digraph g = rcpp::make_ring(6, 4, 9);
    const MixingPair mixing = rcpp::build_mixing(g, g, 9, 0.3);
    SolverConfig cfg;
    cfg.lambda = Eigen::VectorXd::Constant(6, 0.02);
    cfg.alpha_x = cfg.alpha_y = 0.5;
    cfg.gamma_x = cfg.gamma_y = 0.8;
    cfg.schedule = {1.0, 0.99};
    cfg.iterations = 3000;
    cfg.compressor =
        rcpp::make_compressor(CompressorKind::kUniform, prob.dim(), 2, 1, 1.0);
    const auto result = rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 2);
    REQUIRE_FALSE(result.diverged);
    CHECK(result.records.back().comp_err_x < 1e-10);
    CHECK(result.records.back().comp_err_y < 1e-10);
}
