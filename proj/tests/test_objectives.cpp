#include <cmath>
#include <sstream>

#include "doctest.h"
#include "errors.hpp"
#include "objectives.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using rcpp::RidgeProblem;

namespace {

Eigen::VectorXd random_point(int p, std::uint64_t seed, double scale) {
    rcpp::CounterRng rng(seed, 1, 0, rcpp::Stream::kCertify);
    Eigen::VectorXd x(p);
    for (int i = 0; i < p; ++i) x[i] = scale * rng.next_gaussian();
    return x;
}

}  // namespace

TEST_CASE("local gradients") {
    const RidgeProblem prob = RidgeProblem::generate(5, 4, 0.3, 0.1, 11);

    // At zero the data term contributes -2 v_i u_i.
    for (int i = 0; i < prob.agents(); ++i) {
        const Eigen::VectorXd g =
            prob.local_gradient(i, Eigen::VectorXd::Zero(4));
        const Eigen::VectorXd expected =
            -2.0 * prob.observations()[i] * prob.features().row(i).transpose();
        CHECK((g - expected).norm() < 1e-14);
    }

    // Mean gradient vanishes at the oracle minimizer.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < prob.agents(); ++i) {
        mean += prob.local_gradient(i, prob.x_star());
    }
    mean /= prob.agents();
    CHECK(mean.norm() < 1e-9);

    // Finite differences, both local and averaged.
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Eigen::VectorXd x = random_point(4, s, 2.0);
        const int agent = static_cast<int>(s % prob.agents());
        const Eigen::VectorXd fd = oracle::finite_diff_gradient(
            [&](const Eigen::VectorXd& y) { return prob.local_value(agent, y); },
            x);
        const Eigen::VectorXd g = prob.local_gradient(agent, x);
        CHECK((g - fd).norm() / std::max(1.0, g.norm()) < 1e-5);

        const Eigen::VectorXd fd_mean = oracle::finite_diff_gradient(
            [&](const Eigen::VectorXd& y) { return prob.value(y); }, x);
        CHECK((prob.gradient(x) - fd_mean).norm() /
              std::max(1.0, prob.gradient(x).norm()) < 1e-5);
    }
}

TEST_CASE("closed-form solve on hand instances") {
    // Single agent, u = (1, 0), v = 1, rho = 1: (uu' + I) x = u.
    Eigen::MatrixXd U(1, 2);
    U << 1.0, 0.0;
    Eigen::VectorXd v(1);
    v << 1.0;
    const Eigen::VectorXd x = rcpp::ridge_solve(U, v, 1.0);
    CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(0.0).epsilon(1e-12));

    // All-zero observations pin the minimizer at the origin.
    const RidgeProblem zeros = RidgeProblem::from_data(
        Eigen::MatrixXd::Random(4, 3), Eigen::VectorXd::Zero(4), 0.5, 0);
    CHECK(zeros.x_star().norm() < 1e-12);
    CHECK(zeros.f_star() == doctest::Approx(0.0));
}

TEST_CASE("closed-form solve agrees with a gradient-descent oracle") {
    const RidgeProblem prob = RidgeProblem::generate(5, 6, 0.2, 0.1, 99);
    const Eigen::VectorXd gd = oracle::ridge_minimizer_by_descent(prob);
    CHECK((gd - prob.x_star()).norm() < 1e-8);
    CHECK(prob.gradient(prob.x_star()).norm() < 1e-9);
}

TEST_CASE("smoothness constants") {
    // Every u_i = e_1, rho = 0.5: L = 2*1 + 2*0.5 = 3.
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(4, 3);
    U.col(0).setOnes();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(4);
    const RidgeProblem unit = RidgeProblem::from_data(U, v, 0.5, 0);
    const auto [L, mu] = rcpp::smoothness_constants(unit);
    CHECK(L == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(mu >= 2.0 * 0.5 - 1e-12);

    // Zero features degenerate to the pure penalty: L = mu = 2 rho.
    const RidgeProblem pure = RidgeProblem::from_data(
        Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3), 0.7, 0);
    CHECK(pure.smoothness() == doctest::Approx(1.4));
    CHECK(pure.pl_constant() == doctest::Approx(1.4));

    // Sampled Lipschitz bound on the mean gradient.
    const RidgeProblem prob = RidgeProblem::generate(6, 5, 0.1, 0.1, 3);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const Eigen::VectorXd x = random_point(5, 2 * s, 1.5);
        const Eigen::VectorXd y = random_point(5, 2 * s + 1, 1.5);
        const double lhs = (prob.gradient(x) - prob.gradient(y)).norm();
        CHECK(lhs <= prob.smoothness() * (x - y).norm() * (1.0 + 1e-12));
    }
}

TEST_CASE("PL inequality holds with the computed modulus") {
    const RidgeProblem prob = RidgeProblem::generate(8, 5, 0.15, 0.1, 21);
    const double mu = prob.pl_constant();
    for (std::uint64_t s = 0; s < 10000; ++s) {
        const Eigen::VectorXd x = random_point(5, 7000 + s, 3.0);
        const double gap = prob.value(x) - prob.f_star();
        CHECK(gap >= -1e-12);
        CHECK(prob.gradient(x).squaredNorm() >=
              2.0 * mu * gap * (1.0 - 1e-9) - 1e-12);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    const RidgeProblem a = RidgeProblem::generate(6, 4, 0.1, 0.2, 42);
    const RidgeProblem b = RidgeProblem::generate(6, 4, 0.1, 0.2, 42);
    const RidgeProblem c = RidgeProblem::generate(6, 4, 0.1, 0.2, 43);
    CHECK((a.features() - b.features()).norm() == 0.0);
    CHECK((a.observations() - b.observations()).norm() == 0.0);
    CHECK((a.features() - c.features()).norm() > 0.0);
}

TEST_CASE("problem csv round trip is exact") {
    const RidgeProblem prob = RidgeProblem::generate(5, 3, 0.1, 0.1, 77);
    std::stringstream ss;
    rcpp::save_problem_csv(prob, ss);
    const RidgeProblem back = rcpp::load_problem_csv(ss);
    CHECK(back.agents() == prob.agents());
    CHECK(back.dim() == prob.dim());
    CHECK(back.rho() == prob.rho());
    CHECK(back.seed() == prob.seed());
    CHECK((back.features() - prob.features()).norm() == 0.0);
    CHECK((back.observations() - prob.observations()).norm() == 0.0);

    std::stringstream bad("rho=nope\n1,2\n");
    CHECK_THROWS_AS(rcpp::load_problem_csv(bad), rcpp::ParseError);
    std::stringstream ragged("rho=0.1,seed=1\n1,2,3\n1,2\n");
    CHECK_THROWS_AS(rcpp::load_problem_csv(ragged), rcpp::ParseError);
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(RidgeProblem::generate(0, 3, 0.1, 0.1, 1),
                    rcpp::InvalidArgument);
    CHECK_THROWS_AS(RidgeProblem::generate(3, 3, 0.0, 0.1, 1),
                    rcpp::InvalidArgument);
    CHECK_THROWS_AS(RidgeProblem::generate(3, 3, 0.1, -0.5, 1),
                    rcpp::InvalidArgument);
}
