#include <cmath>

#include "doctest.h"
#include "errors.hpp"
#include "oracles.hpp"
#include "solver.hpp"

using rcpp::Algorithm;
using rcpp::AlgoState;
using rcpp::Compressor;
using rcpp::CompressorKind;
using rcpp::MixingPair;
using rcpp::RidgeProblem;
using rcpp::SolverConfig;

namespace {

MixingPair small_mixing(int n, std::uint64_t seed, int extra = 2,
                        double perturb = 0.4) {
    const rcpp::Digraph g = rcpp::make_ring(n, extra, seed);
    return rcpp::build_mixing(g, g, seed, perturb);
}

SolverConfig base_config(const RidgeProblem& prob, CompressorKind kind,
                         double lambda, long iterations) {
    SolverConfig cfg;
    cfg.lambda = Eigen::VectorXd::Constant(prob.agents(), lambda);
    cfg.alpha_x = 0.5;
    cfg.alpha_y = 0.5;
    cfg.gamma_x = 1.0;
    cfg.gamma_y = 1.0;
    cfg.schedule = {1.0, 1.0};
    cfg.iterations = iterations;
    cfg.compressor = rcpp::make_compressor(kind, prob.dim(), 2, 2, 1.0);
    return cfg;
}

double tracking_gap(const AlgoState& st, const RidgeProblem& prob) {
    const Eigen::RowVectorXd lhs =
        Eigen::RowVectorXd::Ones(prob.agents()) * st.Y;
    const Eigen::RowVectorXd rhs =
        Eigen::RowVectorXd::Ones(prob.agents()) * prob.batch_gradient(st.X);
    return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("single agent reduces to centralized gradient descent") {
    const RidgeProblem prob = RidgeProblem::generate(1, 3, 0.2, 0.1, 5);
    const MixingPair mixing = small_mixing(1, 0, 0, 0.0);
    SolverConfig cfg = base_config(prob, CompressorKind::kIdentity, 0.05, 0);

    AlgoState st = rcpp::init_state(
        prob, Eigen::MatrixXd::Zero(1, 3), true);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    for (int k = 0; k < 50; ++k) {
        rcpp::rcpp_step(st, prob, mixing, cfg, 0);
        x -= 0.05 * prob.gradient(x);  // n = 1: f = f_1
        CHECK((st.X.row(0).transpose() - x).lpNorm<Eigen::Infinity>() < 1e-13);
    }
}

TEST_CASE("zero data is a fixed point") {
    const RidgeProblem prob = RidgeProblem::from_data(
        Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4), 0.1, 0);
    const MixingPair mixing = small_mixing(4, 3);
    for (const auto kind :
         {CompressorKind::kIdentity, CompressorKind::kQn,
          CompressorKind::kUniform}) {
        SolverConfig cfg = base_config(prob, kind, 0.05, 10);
        const auto result = rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 3);
        REQUIRE_FALSE(result.diverged);
        for (const auto& rec : result.records) {
            CHECK(rec.residual == doctest::Approx(0.0));
            CHECK(rec.consensus_err == 0.0);
        }
    }
}

TEST_CASE("identity compressor with unit gains reproduces push-pull") {
    const RidgeProblem prob = RidgeProblem::generate(5, 4, 0.1, 0.1, 17);
    const MixingPair mixing = small_mixing(5, 21);
    SolverConfig cfg = base_config(prob, CompressorKind::kIdentity, 0.02, 200);

    AlgoState compressed = rcpp::init_state(
        prob, Eigen::MatrixXd::Zero(5, 4), true);
    AlgoState baseline = rcpp::init_state(
        prob, Eigen::MatrixXd::Zero(5, 4), false);
    for (int k = 0; k < 200; ++k) {
        rcpp::rcpp_step(compressed, prob, mixing, cfg, 0);
        rcpp::pushpull_step(baseline, prob, mixing, cfg);
        CHECK((compressed.X - baseline.X).lpNorm<Eigen::Infinity>() < 1e-12);
        CHECK((compressed.Y - baseline.Y).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("push-pull residual decreases after burn-in") {
    const RidgeProblem prob = RidgeProblem::generate(5, 4, 0.1, 0.1, 23);
    const MixingPair mixing = small_mixing(5, 31);
    SolverConfig cfg = base_config(prob, CompressorKind::kIdentity, 0.02, 500);
    const auto result =
        rcpp::run(prob, mixing, cfg, Algorithm::kPushPull, 0);
    REQUIRE_FALSE(result.diverged);
    REQUIRE(result.records.size() == 501);
    for (std::size_t k = 50; k + 1 < result.records.size(); ++k) {
        if (result.records[k].residual < 1e-13) break;
        CHECK(result.records[k + 1].residual < result.records[k].residual);
    }
    CHECK(result.records.back().residual < 1e-4);
}

TEST_CASE("tracking identity and H-consistency hold along compressed runs") {
    const RidgeProblem prob = RidgeProblem::generate(6, 4, 0.1, 0.1, 29);
    const MixingPair mixing = small_mixing(6, 37);
    for (const auto kind : {CompressorKind::kQn, CompressorKind::kUniform,
                            CompressorKind::kQTn}) {
        SolverConfig cfg = base_config(prob, kind, 0.02, 0);
        cfg.gamma_x = 0.7;
        cfg.gamma_y = 0.7;
        cfg.schedule = {1.0, 0.99};
        AlgoState st = rcpp::init_state(
            prob, Eigen::MatrixXd::Zero(6, 4), true);
        for (int k = 0; k < 80; ++k) {
            rcpp::rcpp_step(st, prob, mixing, cfg, 11);
            const double scale = 1.0 + prob.batch_gradient(st.X).norm();
            CHECK(tracking_gap(st, prob) < 1e-8 * scale);
            CHECK((st.H_R - mixing.R * st.H_x).norm() <
                  1e-9 * (1.0 + st.H_x.norm()));
            CHECK((st.H_C - mixing.C * st.H_y).norm() <
                  1e-9 * (1.0 + st.H_y.norm()));
        }
    }
}

TEST_CASE("consensual optimal start is a fixed point of push-pull") {
    // Identical data on every agent makes each local gradient vanish at
    // the shared minimizer.
    Eigen::MatrixXd U(4, 3);
    for (int i = 0; i < 4; ++i) U.row(i) << 1.0, -0.5, 0.25;
    Eigen::VectorXd v = Eigen::VectorXd::Constant(4, 0.8);
    const RidgeProblem prob = RidgeProblem::from_data(U, v, 0.2, 0);
    CHECK(prob.local_gradient(0, prob.x_star()).norm() < 1e-12);

    const MixingPair mixing = small_mixing(4, 41);
    SolverConfig cfg = base_config(prob, CompressorKind::kIdentity, 0.05, 0);
    AlgoState st = rcpp::init_state(
        prob, Eigen::VectorXd::Ones(4) * prob.x_star().transpose(), false);
    for (int k = 0; k < 100; ++k) {
        rcpp::pushpull_step(st, prob, mixing, cfg);
        const Eigen::VectorXd xbar =
            st.X.transpose() * mixing.u_R / prob.agents();
        CHECK(prob.value(xbar) - prob.f_star() < 1e-12);
        CHECK((st.X - Eigen::VectorXd::Ones(4) * prob.x_star().transpose())
                  .lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("divergence is detected and reported with its iteration") {
    const RidgeProblem prob = RidgeProblem::generate(5, 4, 0.1, 0.1, 31);
    const MixingPair mixing = small_mixing(5, 43);
    SolverConfig cfg = base_config(prob, CompressorKind::kIdentity, 50.0, 200);

    AlgoState st = rcpp::init_state(
        prob, Eigen::MatrixXd::Zero(5, 4), true);
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 200; ++k) {
                rcpp::rcpp_step(st, prob, mixing, cfg, 0);
            }
        }(),
        rcpp::DivergenceError);

    const auto result = rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 0);
    CHECK(result.diverged);
    CHECK(result.diverged_at >= 0);
    CHECK_FALSE(result.records.empty());
    CHECK(result.records.size() ==
          static_cast<std::size_t>(result.diverged_at));
}

TEST_CASE("schedule construction and the advisory bound") {
    const RidgeProblem prob = RidgeProblem::generate(4, 3, 0.1, 0.1, 51);
    const MixingPair mixing = small_mixing(4, 53);
    SolverConfig cfg = base_config(prob, CompressorKind::kIdentity, 0.02, 10);

    const auto flat = rcpp::make_schedule(cfg, mixing, 1.0, 1.0);
    CHECK(flat.schedule.c == 1.0);
    CHECK(flat.schedule.at(0) == flat.schedule.at(500));

    cfg.schedule.c0 = 1.0;
    const auto decaying = rcpp::make_schedule(cfg, mixing, 1.0, 0.99);
    const double s10 = decaying.schedule.at(10);
    CHECK(s10 * s10 == doctest::Approx(std::pow(0.99, 10)).epsilon(1e-12));

    // alpha_x*r*delta = 0.4 contributes the term 1 - 0.4/4 = 0.9; with
    // theta_R = theta_C = 1 and unit gains the advisory max is
    // max{1 - lambda_bar*mu/2, 15/16, 7/8, 0.9, 15/16} = 15/16.
    SolverConfig probe = cfg;
    probe.alpha_x = 0.4;
    probe.alpha_y = 1.0;
    probe.gamma_x = 1.0;
    probe.gamma_y = 1.0;
    probe.compressor.r = 1.0;
    probe.compressor.delta = 1.0;
    const auto advice = rcpp::make_schedule(probe, mixing, 1e6, 0.95);
    CHECK(advice.rho_tilde == doctest::Approx(15.0 / 16.0).epsilon(1e-12));
    CHECK_FALSE(advice.rate_warning);
    const auto warned = rcpp::make_schedule(probe, mixing, 1e6, 0.9);
    CHECK(warned.rate_warning);

    CHECK_THROWS_AS(rcpp::make_schedule(cfg, mixing, 1.0, 0.0),
                    rcpp::InvalidArgument);
    CHECK_THROWS_AS(rcpp::make_schedule(cfg, mixing, 1.0, 1.5),
                    rcpp::InvalidArgument);
}

TEST_CASE("run bookkeeping") {
    const RidgeProblem prob = RidgeProblem::generate(5, 4, 0.1, 0.1, 61);
    const MixingPair mixing = small_mixing(5, 67);
    SolverConfig cfg = base_config(prob, CompressorKind::kQn, 0.02, 0);
    cfg.schedule = {1.0, 0.995};

    const auto empty = rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 0);
    CHECK(empty.records.size() == 1);
    CHECK(empty.records[0].k == 0);
    CHECK(empty.records[0].bits_cum == 0);

    cfg.iterations = 40;
    const auto a = rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 9);
    const auto b = rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 9);
    REQUIRE(a.records.size() == 41);
    REQUIRE(b.records.size() == 41);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].residual == b.records[i].residual);
        CHECK(a.records[i].consensus_err == b.records[i].consensus_err);
        CHECK(a.records[i].tracking_err == b.records[i].tracking_err);
        CHECK(a.records[i].comp_err_x == b.records[i].comp_err_x);
        CHECK(a.records[i].comp_err_y == b.records[i].comp_err_y);
        CHECK(a.records[i].bits_cum == b.records[i].bits_cum);
        if (i > 0) CHECK(a.records[i].bits_cum >= a.records[i - 1].bits_cum);
    }
    const auto other_seed = rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 10);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        any_diff |= a.records[i].residual != other_seed.records[i].residual;
    }
    CHECK(any_diff);
}

TEST_CASE("identity-compressor traces match the push-pull baseline") {
    const RidgeProblem prob = RidgeProblem::generate(5, 4, 0.1, 0.1, 71);
    const MixingPair mixing = small_mixing(5, 73);
    SolverConfig cfg = base_config(prob, CompressorKind::kIdentity, 0.02, 150);

    const auto rcpp_run_result =
        rcpp::run(prob, mixing, cfg, Algorithm::kRcpp, 0);
    const auto pp = rcpp::run(prob, mixing, cfg, Algorithm::kPushPull, 0);
    REQUIRE(rcpp_run_result.records.size() == pp.records.size());
    for (std::size_t i = 0; i < pp.records.size(); ++i) {
        CHECK(std::abs(rcpp_run_result.records[i].residual -
                       pp.records[i].residual) < 1e-12);
        CHECK(std::abs(rcpp_run_result.records[i].consensus_err -
                       pp.records[i].consensus_err) < 1e-12);
        CHECK(std::abs(rcpp_run_result.records[i].tracking_err -
                       pp.records[i].tracking_err) < 1e-12);
        // Both charge the raw 64-bit model, so the bit columns agree.
        CHECK(rcpp_run_result.records[i].bits_cum == pp.records[i].bits_cum);
    }
}

TEST_CASE("solver config validation") {
    const RidgeProblem prob = RidgeProblem::generate(4, 3, 0.1, 0.1, 81);
    const MixingPair mixing = small_mixing(4, 83);
    SolverConfig cfg = base_config(prob, CompressorKind::kIdentity, 0.02, 10);

    CHECK(rcpp::validate_solver_config(cfg, mixing, prob).empty());

    SolverConfig bad = cfg;
    bad.alpha_x = 1.5;
    CHECK_THROWS_AS(rcpp::validate_solver_config(bad, mixing, prob),
                    rcpp::InvalidArgument);
    bad = cfg;
    bad.gamma_y = 0.0;
    CHECK_THROWS_AS(rcpp::validate_solver_config(bad, mixing, prob),
                    rcpp::InvalidArgument);
    bad = cfg;
    bad.lambda = Eigen::VectorXd::Constant(3, 0.1);
    CHECK_THROWS_AS(rcpp::validate_solver_config(bad, mixing, prob),
                    rcpp::InvalidArgument);
    bad = cfg;
    bad.lambda = Eigen::VectorXd::Constant(4, -0.1);
    CHECK_THROWS_AS(rcpp::validate_solver_config(bad, mixing, prob),
                    rcpp::InvalidArgument);

    SolverConfig warned = cfg;
    warned.lambda = Eigen::VectorXd::Constant(4, 10.0);
    CHECK_FALSE(rcpp::validate_solver_config(warned, mixing, prob).empty());
}
