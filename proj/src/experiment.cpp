#include "experiment.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "errors.hpp"
#include "metrics.hpp"

namespace rcpp {

Digraph build_graph(const GraphConfig& cfg) {
    if (cfg.kind != "ring") {
        throw InvalidArgument("unknown topology '" + cfg.kind +
                              "'; choices: ring");
    }
    return make_ring(cfg.n, cfg.extra_edges, cfg.seed);
}

MixingPair build_mixing_pair(const GraphConfig& cfg) {
    // One communication graph supports both matrices; R and C differ by
    // their (independently perturbed) weights.
    const Digraph g = build_graph(cfg);
    return build_mixing(g, g, cfg.seed, cfg.perturb);
}

RidgeProblem build_problem(const ProblemConfig& cfg, int agents) {
    return RidgeProblem::generate(agents, cfg.p, cfg.rho, cfg.noise, cfg.seed);
}

Compressor build_compressor(const CompressorConfig& cfg, int dim) {
    return make_compressor(compressor_kind_from_string(cfg.kind), dim, cfg.b,
                           cfg.k, cfg.level);
}

SolverConfig build_solver_config(const ExperimentConfig& cfg) {
    SolverConfig sc;
    if (cfg.algorithm.lambda.size() == 1) {
        sc.lambda =
            Eigen::VectorXd::Constant(cfg.graph.n, cfg.algorithm.lambda[0]);
    } else {
        sc.lambda = Eigen::Map<const Eigen::VectorXd>(
            cfg.algorithm.lambda.data(),
            static_cast<Eigen::Index>(cfg.algorithm.lambda.size()));
    }
    sc.alpha_x = cfg.algorithm.alpha_x;
    sc.alpha_y = cfg.algorithm.alpha_y;
    sc.gamma_x = cfg.algorithm.gamma_x;
    sc.gamma_y = cfg.algorithm.gamma_y;
    sc.schedule.c0 = cfg.algorithm.c0;
    sc.schedule.c = cfg.algorithm.c;
    sc.iterations = cfg.algorithm.iterations;
    sc.compressor = build_compressor(cfg.compressor, cfg.problem.p);
    return sc;
}

namespace {

RunSummaryRow summarize(const ExperimentConfig& cfg, const std::string& algo,
                        std::uint64_t seed, const RunResult& result) {
    RunSummaryRow row;
    row.algorithm = algo;
    row.seed = seed;
    row.iterations_done =
        static_cast<long>(result.records.size()) - 1;
    row.diverged = result.diverged;
    if (!result.records.empty()) {
        row.final_residual = result.records.back().residual;
        row.bits_total = result.records.back().bits_cum;
    }
    std::vector<double> residuals;
    residuals.reserve(result.records.size());
    for (const auto& r : result.records) residuals.push_back(r.residual);
    const long burn = cfg.output.fit_burn_in >= 0
                          ? cfg.output.fit_burn_in
                          : cfg.algorithm.iterations / 10;
    if (const auto fit = fit_rate(residuals, burn)) {
        row.fit_ok = true;
        row.c_hat = fit->c_hat;
        row.r2 = fit->r2;
    }
    if (cfg.output.has_residual_target) {
        row.pass = (!row.diverged &&
                    row.final_residual < cfg.output.residual_target)
                       ? 1
                       : 0;
    }
    return row;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir, int workers) {
    const auto issues = validate_config(cfg);
    if (!issues.empty()) {
        std::string what =
            "config has " + std::to_string(issues.size()) + " problem(s)";
        for (const auto& s : issues) what += "\n  " + s;
        throw ParseError(what, issues);
    }

    const MixingPair mixing = build_mixing_pair(cfg.graph);
    const RidgeProblem problem = build_problem(cfg.problem, cfg.graph.n);
    const SolverConfig solver_cfg = build_solver_config(cfg);

    ExperimentReport report;
    report.warnings = validate_solver_config(solver_cfg, mixing, problem);

    struct Job {
        std::string algo_name;
        Algorithm algo;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& name : cfg.algorithm.names) {
        for (std::uint64_t seed : cfg.output.seeds) {
            jobs.push_back({name, algorithm_from_string(name), seed});
        }
    }

    std::vector<RunResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            try {
                results[i] = run(problem, mixing, solver_cfg, jobs[i].algo,
                                 jobs[i].seed);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = e.what();
                failed = true;
            }
        }
    };
    const int thread_count = std::max(
        1, std::min<int>(workers, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed) throw Error("experiment run failed: " + failure);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    // Files written on the main thread in job order so the directory
    // contents do not depend on scheduling.
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string path = out_dir + "/" + jobs[i].algo_name + "_seed" +
                                 std::to_string(jobs[i].seed) + ".csv";
        std::ofstream out(path);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        write_trace_csv(out, results[i].records);
        report.rows.push_back(
            summarize(cfg, jobs[i].algo_name, jobs[i].seed, results[i]));
        report.any_diverged |= results[i].diverged;
    }

    if (cfg.output.seeds.size() > 1) {
        std::size_t idx = 0;
        for (const auto& name : cfg.algorithm.names) {
            std::vector<std::vector<IterationRecord>> traces;
            for (std::size_t s = 0; s < cfg.output.seeds.size(); ++s) {
                traces.push_back(results[idx++].records);
            }
            const std::string path = out_dir + "/" + name + "_mean.csv";
            std::ofstream out(path);
            if (!out) throw IoError("cannot open '" + path + "' for writing");
            write_mean_trace_csv(out, traces);
        }
    }

    std::ofstream summary(out_dir + "/summary.txt");
    if (!summary) {
        throw IoError("cannot open '" + out_dir + "/summary.txt' for writing");
    }
    summary << format_report(report);
    return report;
}

std::string format_report(const ExperimentReport& report) {
    std::string out;
    for (const auto& w : report.warnings) out += "warning: " + w + "\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %6s %8s %14s %10s %8s %14s %s\n",
                  "algorithm", "seed", "iters", "final_residual", "c_hat",
                  "r2", "bits_total", "status");
    out += line;
    for (const auto& r : report.rows) {
        std::string status = r.diverged ? "diverged" : "ok";
        if (r.pass == 1) status += ",pass";
        if (r.pass == 0) status += ",fail";
        char c_hat[32] = "n/a";
        char r2[32] = "n/a";
        if (r.fit_ok) {
            std::snprintf(c_hat, sizeof(c_hat), "%.6f", r.c_hat);
            std::snprintf(r2, sizeof(r2), "%.4f", r.r2);
        }
        std::snprintf(line, sizeof(line),
                      "%-12s %6llu %8ld %14.6e %10s %8s %14llu %s\n",
                      r.algorithm.c_str(),
                      static_cast<unsigned long long>(r.seed),
                      r.iterations_done, r.final_residual, c_hat, r2,
                      static_cast<unsigned long long>(r.bits_total),
                      status.c_str());
        out += line;
    }
    return out;
}

CertifySummary run_certify(const std::string& kind, int dim, int bits, int k,
                           double level, long samples, std::uint64_t seed) {
    CertifySummary summary;
    summary.compressor = make_compressor(compressor_kind_from_string(kind),
                                         dim, bits, k, level);
    summary.result = certify_compressor(summary.compressor, dim, samples, seed);

    const auto& res = summary.result;
    const auto& comp = summary.compressor;
    std::string t;
    char line[256];
    std::snprintf(line, sizeof(line),
                  "operator %s  d=%d  declared: C=%.6g sigma2=%.6g r=%.6g "
                  "delta=%.6g sigma2_r=%.6g\n",
                  to_string(comp.kind).c_str(), dim, comp.c_rel, comp.sigma2,
                  comp.r, comp.delta, comp.sigma2_r);
    t += line;
    std::snprintf(line, sizeof(line),
                  "estimates: C=%.6g sigma2=%.6g delta=%.6g sigma2_r=%.6g\n",
                  res.c_rel_hat, res.sigma2_hat, res.delta_hat,
                  res.sigma2_r_hat);
    t += line;
    std::snprintf(line, sizeof(line), "%12s %14s %12s %14s %14s %12s %14s\n",
                  "||x||", "E|C(x)-x|^2", "stderr", "bound", "E|C(x)/r-x|^2",
                  "stderr", "bound");
    t += line;
    for (const auto& s : res.scales) {
        std::snprintf(line, sizeof(line),
                      "%12.4g %14.6g %12.4g %14.6g %14.6g %12.4g %14.6g\n",
                      s.norm, s.mean_abs, s.se_abs, s.bound_abs, s.mean_rel,
                      s.se_rel, s.bound_rel);
        t += line;
    }
    std::snprintf(line, sizeof(line), "direct form: %s   scaled form: %s\n",
                  res.direct_pass ? "PASS" : "FAIL",
                  res.scaled_pass ? "PASS" : "FAIL");
    t += line;
    summary.table = t;
    return summary;
}

}  // namespace rcpp
