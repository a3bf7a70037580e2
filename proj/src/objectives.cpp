#include "objectives.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

namespace rcpp {

RidgeProblem RidgeProblem::generate(int agents, int dim, double rho,
                                    double noise, std::uint64_t seed) {
    if (agents < 1 || dim < 1) {
        throw InvalidArgument("ridge problem needs agents >= 1 and dim >= 1");
    }
    if (!(rho > 0.0)) {
        throw InvalidArgument("ridge penalty rho must be positive");
    }
    if (noise < 0.0) throw InvalidArgument("noise level must be nonnegative");

    CounterRng truth_rng(seed, 0, 0, Stream::kTruth);
    Eigen::VectorXd x_true(dim);
    for (int j = 0; j < dim; ++j) x_true[j] = truth_rng.next_gaussian();

    RidgeProblem p;
    p.features_.resize(agents, dim);
    p.observations_.resize(agents);
    for (int i = 0; i < agents; ++i) {
        CounterRng feat_rng(seed, 0, static_cast<std::uint64_t>(i),
                            Stream::kFeatures);
        for (int j = 0; j < dim; ++j) {
            p.features_(i, j) = feat_rng.next_gaussian();
        }
        CounterRng noise_rng(seed, 0, static_cast<std::uint64_t>(i),
                             Stream::kNoise);
        p.observations_[i] =
            p.features_.row(i).dot(x_true) + noise * noise_rng.next_gaussian();
    }
    p.rho_ = rho;
    p.seed_ = seed;
    p.finalize();
    return p;
}

RidgeProblem RidgeProblem::from_data(Eigen::MatrixXd features,
                                     Eigen::VectorXd observations, double rho,
                                     std::uint64_t seed) {
    if (features.rows() != observations.size()) {
        throw InvalidArgument("feature rows and observation count differ");
    }
    if (features.rows() < 1 || features.cols() < 1) {
        throw InvalidArgument("ridge problem needs at least one agent/column");
    }
    if (!(rho > 0.0)) {
        throw InvalidArgument("ridge penalty rho must be positive");
    }
    RidgeProblem p;
    p.features_ = std::move(features);
    p.observations_ = std::move(observations);
    p.rho_ = rho;
    p.seed_ = seed;
    p.finalize();
    return p;
}

void RidgeProblem::finalize() {
    x_star_ = ridge_solve(features_, observations_, rho_);
    f_star_ = value(x_star_);

    double lmax = 0.0;
    for (int i = 0; i < agents(); ++i) {
        lmax = std::max(lmax, 2.0 * features_.row(i).squaredNorm() + 2.0 * rho_);
    }
    L_ = lmax;

    const Eigen::MatrixXd gram =
        features_.transpose() * features_ / static_cast<double>(agents());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) {
        mu_ = 2.0 * rho_;  // safe lower bound
    } else {
        mu_ = 2.0 * rho_ + 2.0 * std::max(0.0, eig.eigenvalues().minCoeff());
    }
}

double RidgeProblem::local_value(int agent, const Eigen::VectorXd& x) const {
    const double resid = features_.row(agent).dot(x) - observations_[agent];
    return resid * resid + rho_ * x.squaredNorm();
}

Eigen::VectorXd RidgeProblem::local_gradient(int agent,
                                             const Eigen::VectorXd& x) const {
    const double resid = features_.row(agent).dot(x) - observations_[agent];
    return 2.0 * resid * features_.row(agent).transpose() + 2.0 * rho_ * x;
}

double RidgeProblem::value(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd resid = features_ * x - observations_;
    return resid.squaredNorm() / static_cast<double>(agents()) +
           rho_ * x.squaredNorm();
}

Eigen::VectorXd RidgeProblem::gradient(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd resid = features_ * x - observations_;
    return 2.0 * features_.transpose() * resid / static_cast<double>(agents()) +
           2.0 * rho_ * x;
}

Eigen::MatrixXd RidgeProblem::batch_gradient(const Eigen::MatrixXd& X) const {
    if (X.rows() != agents() || X.cols() != dim()) {
        throw InvalidArgument("state matrix shape mismatch");
    }
    Eigen::MatrixXd G(agents(), dim());
    for (int i = 0; i < agents(); ++i) {
        G.row(i) = local_gradient(i, X.row(i).transpose()).transpose();
    }
    return G;
}

Eigen::VectorXd RidgeProblem::local_smoothness() const {
    Eigen::VectorXd l(agents());
    for (int i = 0; i < agents(); ++i) {
        l[i] = 2.0 * features_.row(i).squaredNorm() + 2.0 * rho_;
    }
    return l;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& observations, double rho) {
    if (!(rho > 0.0)) {
        throw InvalidArgument("ridge penalty rho must be positive");
    }
    const double n = static_cast<double>(features.rows());
    const int p = static_cast<int>(features.cols());
    const Eigen::MatrixXd A =
        features.transpose() * features / n +
        rho * Eigen::MatrixXd::Identity(p, p);
    const Eigen::VectorXd b = features.transpose() * observations / n;
    const Eigen::VectorXd x = A.ldlt().solve(b);
    if ((A * x - b).norm() >= 1e-10) {
        throw Error("ridge normal equations solved to insufficient accuracy");
    }
    return x;
}

SmoothnessConstants smoothness_constants(const RidgeProblem& problem) {
    return {problem.smoothness(), problem.pl_constant()};
}

void save_problem_csv(const RidgeProblem& problem, std::ostream& out) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", problem.rho());
    out << "rho=" << buf << ",seed=" << problem.seed() << "\n";
    for (int i = 0; i < problem.agents(); ++i) {
        for (int j = 0; j < problem.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g",
                          problem.features()(i, j));
            out << buf << ",";
        }
        std::snprintf(buf, sizeof(buf), "%.17g", problem.observations()[i]);
        out << buf << "\n";
    }
}

void save_problem_csv(const RidgeProblem& problem, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save_problem_csv(problem, out);
    if (!out.good()) throw IoError("write failed for '" + path + "'");
}

RidgeProblem load_problem_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("problem csv: empty input", {});
    }
    double rho = 0.0;
    std::uint64_t seed = 0;
    if (std::sscanf(line.c_str(), "rho=%lf,seed=%" SCNu64, &rho, &seed) != 2) {
        throw ParseError("problem csv: header must be 'rho=<r>,seed=<s>', got '" +
                             line + "'",
                         {});
    }

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    std::vector<std::string> issues;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                issues.push_back("line " + std::to_string(lineno) +
                                 ": bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && !row.empty() && row.size() != rows[0].size()) {
            issues.push_back("line " + std::to_string(lineno) +
                             ": expected " + std::to_string(rows[0].size()) +
                             " columns, got " + std::to_string(row.size()));
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (!issues.empty()) {
        std::string what = "problem csv has " + std::to_string(issues.size()) +
                           " invalid line(s)";
        for (const auto& s : issues) what += "\n  " + s;
        throw ParseError(what, issues);
    }
    if (rows.empty() || rows[0].size() < 2) {
        throw ParseError("problem csv: need at least one agent row with at "
                         "least one feature and one observation",
                         {});
    }
    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(rows[0].size()) - 1;
    Eigen::MatrixXd U(n, p);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) U(i, j) = rows[i][j];
        v[i] = rows[i][p];
    }
    return RidgeProblem::from_data(std::move(U), std::move(v), rho, seed);
}

RidgeProblem load_problem_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return load_problem_csv(in);
}

}  // namespace rcpp
