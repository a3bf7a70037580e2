#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace rcpp {

// Ridge regression over n agents: agent i holds one sample (u_i, v_i) and
//   f_i(x) = (u_i'x - v_i)^2 + rho*||x||^2,   f = (1/n) sum f_i.
// The oracle minimizer, optimal value, and smoothness/PL constants are
// computed at construction.
class RidgeProblem {
public:
    // Synthesizes data: features standard normal, v_i = u_i'x_true + noise*g.
    static RidgeProblem generate(int agents, int dim, double rho, double noise,
                                 std::uint64_t seed);
    // Wraps explicit data; `seed` is only a label for serialization.
    static RidgeProblem from_data(Eigen::MatrixXd features,
                                  Eigen::VectorXd observations, double rho,
                                  std::uint64_t seed);

    int agents() const { return static_cast<int>(features_.rows()); }
    int dim() const { return static_cast<int>(features_.cols()); }
    double rho() const { return rho_; }
    std::uint64_t seed() const { return seed_; }
    const Eigen::MatrixXd& features() const { return features_; }
    const Eigen::VectorXd& observations() const { return observations_; }

    double local_value(int agent, const Eigen::VectorXd& x) const;
    Eigen::VectorXd local_gradient(int agent, const Eigen::VectorXd& x) const;

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

    // Row i = gradient of f_i at row i of X.
    Eigen::MatrixXd batch_gradient(const Eigen::MatrixXd& X) const;

    const Eigen::VectorXd& x_star() const { return x_star_; }
    double f_star() const { return f_star_; }
    double smoothness() const { return L_; }      // L = max_i L_i
    double pl_constant() const { return mu_; }    // strong-convexity modulus
    Eigen::VectorXd local_smoothness() const;     // L_i = 2||u_i||^2 + 2rho

private:
    RidgeProblem() = default;
    void finalize();

    Eigen::MatrixXd features_;       // n x p
    Eigen::VectorXd observations_;   // n
    double rho_ = 0.0;
    std::uint64_t seed_ = 0;
    Eigen::VectorXd x_star_;
    double f_star_ = 0.0;
    double L_ = 0.0;
    double mu_ = 0.0;
};

// Solves ((1/n) U'U + rho I) x = (1/n) U'v; throws if the normal-equation
// residual exceeds 1e-10.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& observations, double rho);

struct SmoothnessConstants {
    double L = 0.0;
    double mu = 0.0;
};
SmoothnessConstants smoothness_constants(const RidgeProblem& problem);

// CSV: header line `rho=<r>,seed=<s>`, then one `u_1,...,u_p,v` row per
// agent. 17 significant digits, so the round trip is exact.
void save_problem_csv(const RidgeProblem& problem, std::ostream& out);
void save_problem_csv(const RidgeProblem& problem, const std::string& path);
RidgeProblem load_problem_csv(std::istream& in);
RidgeProblem load_problem_csv_file(const std::string& path);

}  // namespace rcpp
