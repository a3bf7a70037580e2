// Command-line front end; talks to the library exclusively through the
// C API in rcpp/rcpp.h.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rcpp/rcpp.h"

namespace {

int fail_with_last_error() {
    std::fprintf(stderr, "error: %s\n", rcpp_last_error());
    return 2;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ",";
        out += s;
    }
    return out;
}

struct ConfigHandle {
    rcpp_config* ptr = nullptr;
    ~ConfigHandle() { rcpp_config_free(ptr); }
};

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::vector<std::string>& sets,
            const std::vector<std::string>& seeds, int workers,
            bool print_config) {
    ConfigHandle cfg;
    rcpp_status st = config_path.empty()
                         ? rcpp_config_default(&cfg.ptr)
                         : rcpp_config_load(config_path.c_str(), &cfg.ptr);
    if (st != RCPP_OK) return fail_with_last_error();

    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n",
                         kv.c_str());
            return 2;
        }
        st = rcpp_config_set(cfg.ptr, kv.substr(0, eq).c_str(),
                             kv.substr(eq + 1).c_str());
        if (st != RCPP_OK) return fail_with_last_error();
    }
    if (!seeds.empty()) {
        st = rcpp_config_set(cfg.ptr, "output.seeds", join(seeds).c_str());
        if (st != RCPP_OK) return fail_with_last_error();
    }
    st = rcpp_config_validate(cfg.ptr);
    if (st != RCPP_OK) return fail_with_last_error();

    if (print_config) {
        const size_t n = rcpp_config_canonical(cfg.ptr, nullptr, 0);
        std::string text(n, '\0');
        rcpp_config_canonical(cfg.ptr, text.data(), text.size());
        std::fputs(text.c_str(), stdout);
        return 0;
    }

    const size_t dn = rcpp_config_out_dir(
        cfg.ptr, out_dir.empty() ? nullptr : out_dir.c_str(), nullptr, 0);
    std::string dir(dn, '\0');
    rcpp_config_out_dir(cfg.ptr, out_dir.empty() ? nullptr : out_dir.c_str(),
                        dir.data(), dir.size());
    dir.resize(dn > 0 ? dn - 1 : 0);

    rcpp_report* report = nullptr;
    st = rcpp_experiment_run(cfg.ptr, dir.c_str(), workers, &report);
    if (st != RCPP_OK) return fail_with_last_error();

    const size_t rn = rcpp_report_text(report, nullptr, 0);
    std::string text(rn, '\0');
    rcpp_report_text(report, text.data(), text.size());
    std::fputs(text.c_str(), stdout);
    std::printf("outputs written to %s\n", dir.c_str());

    const int diverged = rcpp_report_any_diverged(report);
    rcpp_report_free(report);
    return diverged ? 1 : 0;
}

int cmd_certify(const std::string& kind, int dim, int bits, int k,
                double level, long samples, std::uint64_t seed) {
    rcpp_certify_outcome outcome;
    std::vector<char> table(16384);
    const rcpp_status st =
        rcpp_certify(kind.c_str(), dim, bits, k, level, samples, seed,
                     &outcome, table.data(), table.size());
    if (st != RCPP_OK) return fail_with_last_error();
    std::fputs(table.data(), stdout);
    return 0;
}

int cmd_graph_emit(int n, int extra_edges, std::uint64_t seed,
                   const std::string& out_path) {
    rcpp_graph* g = nullptr;
    rcpp_status st = rcpp_graph_ring(n, extra_edges, seed, &g);
    if (st != RCPP_OK) return fail_with_last_error();
    st = rcpp_graph_save(g, out_path.c_str());
    rcpp_graph_free(g);
    if (st != RCPP_OK) return fail_with_last_error();
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_graph_validate(const std::string& path) {
    rcpp_graph* g = nullptr;
    rcpp_status st = rcpp_graph_load(path.c_str(), &g);
    if (st != RCPP_OK) return fail_with_last_error();

    int connected = 0;
    rcpp_graph_strongly_connected(g, &connected);
    int count = 0;
    rcpp_graph_roots(g, nullptr, 0, &count);
    std::vector<int> roots(count);
    if (count > 0) rcpp_graph_roots(g, roots.data(), count, &count);

    std::printf("nodes: %d\n", rcpp_graph_nodes(g));
    std::printf("edges: %d\n", rcpp_graph_edges(g));
    std::printf("strongly_connected: %s\n", connected ? "yes" : "no");
    std::printf("roots:");
    for (int r : roots) std::printf(" %d", r);
    std::printf("\n");
    rcpp_graph_free(g);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Decentralized optimization over directed graphs with compressed "
        "push-pull gradient tracking"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run the configured experiment");
    std::string config_path, out_dir;
    std::vector<std::string> sets, seeds;
    int workers = 1;
    bool print_config = false;
    run->add_option("--config", config_path, "experiment config file");
    run->add_option("--out", out_dir,
                    "output directory (overrides the config and RCPP_OUT_DIR)");
    run->add_option("--set", sets,
                    "override a config key, e.g. --set algorithm.c=0.99");
    run->add_option("--seed", seeds, "replace the configured seed list");
    run->add_option("--workers", workers, "concurrent runs")
        ->check(CLI::PositiveNumber);
    run->add_flag("--print-config", print_config,
                  "print the canonical config and exit");

    // certify
    auto* certify = app.add_subcommand(
        "certify", "estimate and check a compressor's error contract");
    std::string kind = "qn";
    int dim = 16, bits = 2, k = 4;
    double level = 1.0;
    long samples = 100000;
    std::uint64_t certify_seed = 1;
    certify->add_option("--kind", kind,
                        "identity | qn | topk | qtn | uniform");
    certify->add_option("--d", dim, "vector dimension");
    certify->add_option("--b", bits, "bits per entry (qn/qtn)");
    certify->add_option("--k", k, "kept entries (topk/qtn)");
    certify->add_option("--level", level, "grid step (uniform)");
    certify->add_option("--samples", samples, "Monte-Carlo samples per scale");
    certify->add_option("--seed", certify_seed, "sampling seed");

    // graph
    auto* graph = app.add_subcommand("graph", "emit or inspect edge lists");
    graph->require_subcommand(1);
    auto* emit = graph->add_subcommand("emit", "generate a ring-plus-chords graph");
    int gn = 20, gextra = 20;
    std::uint64_t gseed = 7;
    std::string gout = "graph.txt";
    emit->add_option("--n", gn, "node count")->required();
    emit->add_option("--extra-edges", gextra, "random chords beyond the cycle");
    emit->add_option("--seed", gseed, "chord placement seed");
    emit->add_option("--out", gout, "output edge-list file");
    auto* validate = graph->add_subcommand("validate", "inspect an edge list");
    std::string gpath;
    validate->add_option("file", gpath, "edge-list file")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        return cmd_run(config_path, out_dir, sets, seeds, workers,
                       print_config);
    }
    if (certify->parsed()) {
        return cmd_certify(kind, dim, bits, k, level, samples, certify_seed);
    }
    if (graph->parsed()) {
        if (emit->parsed()) return cmd_graph_emit(gn, gextra, gseed, gout);
        if (validate->parsed()) return cmd_graph_validate(gpath);
    }
    return 0;
}
