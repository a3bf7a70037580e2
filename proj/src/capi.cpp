#include "rcpp/rcpp.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "config.hpp"
#include "digraph.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "metrics.hpp"
#include "objectives.hpp"
#include "solver.hpp"

struct rcpp_graph {
    rcpp::Digraph g;
};
struct rcpp_mixing {
    rcpp::MixingPair m;
};
struct rcpp_problem {
    rcpp::RidgeProblem p;
};
struct rcpp_config {
    rcpp::ExperimentConfig c;
};
struct rcpp_trace {
    rcpp::RunResult r;
};
struct rcpp_report {
    rcpp::ExperimentReport rep;
    std::string text;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
rcpp_status guarded(Fn&& fn) noexcept {
    try {
        return fn();
    } catch (const rcpp::InvalidArgument& e) {
        set_error(e.what());
        return RCPP_ERROR_INVALID_ARGUMENT;
    } catch (const rcpp::PreconditionViolation& e) {
        set_error(e.what());
        return RCPP_ERROR_PRECONDITION;
    } catch (const rcpp::DivergenceError& e) {
        set_error(e.what());
        return RCPP_ERROR_DIVERGED;
    } catch (const rcpp::ParseError& e) {
        set_error(e.what());
        return RCPP_ERROR_PARSE;
    } catch (const rcpp::IoError& e) {
        set_error(e.what());
        return RCPP_ERROR_IO;
    } catch (const std::exception& e) {
        set_error(e.what());
        return RCPP_ERROR_INTERNAL;
    } catch (...) {
        set_error("unknown failure");
        return RCPP_ERROR_INTERNAL;
    }
}

rcpp_status require(bool ok, const char* msg) {
    if (!ok) {
        set_error(msg);
        return RCPP_ERROR_INVALID_ARGUMENT;
    }
    return RCPP_OK;
}

size_t copy_out(const std::string& text, char* buffer, size_t capacity) {
    if (buffer && capacity > 0) {
        const size_t n = std::min(capacity - 1, text.size());
        std::memcpy(buffer, text.data(), n);
        buffer[n] = '\0';
    }
    return text.size() + 1;
}

}  // namespace

extern "C" {

const char* rcpp_last_error(void) { return g_last_error.c_str(); }

/* ---- graphs ---- */

rcpp_status rcpp_graph_ring(int nodes, int extra_edges, uint64_t seed,
                            rcpp_graph** out) {
    if (rcpp_status s = require(out != nullptr, "out must not be NULL"); s)
        return s;
    return guarded([&] {
        *out = new rcpp_graph{rcpp::make_ring(nodes, extra_edges, seed)};
        return RCPP_OK;
    });
}

rcpp_status rcpp_graph_load(const char* path, rcpp_graph** out) {
    if (rcpp_status s =
            require(out != nullptr && path != nullptr, "NULL argument");
        s)
        return s;
    return guarded([&] {
        *out = new rcpp_graph{rcpp::load_edge_list_file(path)};
        return RCPP_OK;
    });
}

rcpp_status rcpp_graph_save(const rcpp_graph* g, const char* path) {
    if (rcpp_status s = require(g != nullptr && path != nullptr, "NULL argument");
        s)
        return s;
    return guarded([&] {
        rcpp::save_edge_list(g->g, std::string(path));
        return RCPP_OK;
    });
}

int rcpp_graph_nodes(const rcpp_graph* g) {
    return g ? g->g.node_count() : 0;
}

int rcpp_graph_edges(const rcpp_graph* g) {
    return g ? g->g.edge_count() : 0;
}

rcpp_status rcpp_graph_strongly_connected(const rcpp_graph* g, int* out) {
    if (rcpp_status s = require(g != nullptr && out != nullptr, "NULL argument");
        s)
        return s;
    return guarded([&] {
        *out = rcpp::is_strongly_connected(g->g) ? 1 : 0;
        return RCPP_OK;
    });
}

rcpp_status rcpp_graph_roots(const rcpp_graph* g, int* roots, int capacity,
                             int* count) {
    if (rcpp_status s = require(g != nullptr && count != nullptr,
                                "graph and count must not be NULL");
        s)
        return s;
    return guarded([&] {
        const auto r = rcpp::root_set(g->g);
        *count = static_cast<int>(r.size());
        if (roots) {
            const int n = std::min<int>(capacity, static_cast<int>(r.size()));
            for (int i = 0; i < n; ++i) roots[i] = r[i];
        }
        return RCPP_OK;
    });
}

void rcpp_graph_free(rcpp_graph* g) { delete g; }

/* ---- mixing ---- */

rcpp_status rcpp_mixing_build(const rcpp_graph* graph_r,
                              const rcpp_graph* graph_c, uint64_t seed,
                              double perturb, rcpp_mixing** out) {
    if (rcpp_status s = require(
            graph_r != nullptr && graph_c != nullptr && out != nullptr,
            "NULL argument");
        s)
        return s;
    return guarded([&] {
        *out = new rcpp_mixing{
            rcpp::build_mixing(graph_r->g, graph_c->g, seed, perturb)};
        return RCPP_OK;
    });
}

int rcpp_mixing_nodes(const rcpp_mixing* m) {
    return m ? static_cast<int>(m->m.R.rows()) : 0;
}

rcpp_status rcpp_mixing_entry(const rcpp_mixing* m, rcpp_matrix_id which,
                              int row, int col, double* out) {
    if (rcpp_status s = require(m != nullptr && out != nullptr, "NULL argument");
        s)
        return s;
    const auto& mat = which == RCPP_MATRIX_R ? m->m.R : m->m.C;
    if (row < 0 || row >= mat.rows() || col < 0 || col >= mat.cols()) {
        set_error("matrix index out of range");
        return RCPP_ERROR_INVALID_ARGUMENT;
    }
    *out = mat(row, col);
    return RCPP_OK;
}

rcpp_status rcpp_mixing_eigvec_entry(const rcpp_mixing* m, rcpp_vector_id which,
                                     int index, double* out) {
    if (rcpp_status s = require(m != nullptr && out != nullptr, "NULL argument");
        s)
        return s;
    const auto& vec = which == RCPP_VECTOR_UR ? m->m.u_R : m->m.u_C;
    if (index < 0 || index >= vec.size()) {
        set_error("vector index out of range");
        return RCPP_ERROR_INVALID_ARGUMENT;
    }
    *out = vec[index];
    return RCPP_OK;
}

void rcpp_mixing_free(rcpp_mixing* m) { delete m; }

/* ---- problems ---- */

rcpp_status rcpp_problem_generate(int agents, int dim, double rho, double noise,
                                  uint64_t seed, rcpp_problem** out) {
    if (rcpp_status s = require(out != nullptr, "out must not be NULL"); s)
        return s;
    return guarded([&] {
        *out = new rcpp_problem{
            rcpp::RidgeProblem::generate(agents, dim, rho, noise, seed)};
        return RCPP_OK;
    });
}

rcpp_status rcpp_problem_load_csv(const char* path, rcpp_problem** out) {
    if (rcpp_status s =
            require(out != nullptr && path != nullptr, "NULL argument");
        s)
        return s;
    return guarded([&] {
        *out = new rcpp_problem{rcpp::load_problem_csv_file(path)};
        return RCPP_OK;
    });
}

rcpp_status rcpp_problem_save_csv(const rcpp_problem* p, const char* path) {
    if (rcpp_status s = require(p != nullptr && path != nullptr, "NULL argument");
        s)
        return s;
    return guarded([&] {
        rcpp::save_problem_csv(p->p, std::string(path));
        return RCPP_OK;
    });
}

int rcpp_problem_agents(const rcpp_problem* p) {
    return p ? p->p.agents() : 0;
}

int rcpp_problem_dim(const rcpp_problem* p) { return p ? p->p.dim() : 0; }

rcpp_status rcpp_problem_optimum(const rcpp_problem* p, double* x_star,
                                 int capacity, double* f_star) {
    if (rcpp_status s = require(p != nullptr, "problem must not be NULL"); s)
        return s;
    if (x_star && capacity < p->p.dim()) {
        set_error("x_star capacity below problem dimension");
        return RCPP_ERROR_INVALID_ARGUMENT;
    }
    if (x_star) {
        for (int i = 0; i < p->p.dim(); ++i) x_star[i] = p->p.x_star()[i];
    }
    if (f_star) *f_star = p->p.f_star();
    return RCPP_OK;
}

rcpp_status rcpp_problem_constants(const rcpp_problem* p, double* smoothness,
                                   double* pl_constant) {
    if (rcpp_status s = require(p != nullptr, "problem must not be NULL"); s)
        return s;
    if (smoothness) *smoothness = p->p.smoothness();
    if (pl_constant) *pl_constant = p->p.pl_constant();
    return RCPP_OK;
}

void rcpp_problem_free(rcpp_problem* p) { delete p; }

/* ---- configs ---- */

rcpp_status rcpp_config_default(rcpp_config** out) {
    if (rcpp_status s = require(out != nullptr, "out must not be NULL"); s)
        return s;
    *out = new rcpp_config{};
    return RCPP_OK;
}

rcpp_status rcpp_config_load(const char* path, rcpp_config** out) {
    if (rcpp_status s =
            require(out != nullptr && path != nullptr, "NULL argument");
        s)
        return s;
    return guarded([&] {
        *out = new rcpp_config{rcpp::parse_config(path)};
        return RCPP_OK;
    });
}

rcpp_status rcpp_config_set(rcpp_config* cfg, const char* dotted_key,
                            const char* value) {
    if (rcpp_status s = require(
            cfg != nullptr && dotted_key != nullptr && value != nullptr,
            "NULL argument");
        s)
        return s;
    return guarded([&] {
        rcpp::apply_override(cfg->c, dotted_key, value);
        return RCPP_OK;
    });
}

rcpp_status rcpp_config_validate(const rcpp_config* cfg) {
    if (rcpp_status s = require(cfg != nullptr, "config must not be NULL"); s)
        return s;
    return guarded([&] {
        const auto issues = rcpp::validate_config(cfg->c);
        if (!issues.empty()) {
            std::string what = "config has " + std::to_string(issues.size()) +
                               " problem(s)";
            for (const auto& i : issues) what += "\n  " + i;
            throw rcpp::ParseError(what, issues);
        }
        return RCPP_OK;
    });
}

size_t rcpp_config_canonical(const rcpp_config* cfg, char* buffer,
                             size_t capacity) {
    if (!cfg) return 0;
    return copy_out(rcpp::canonical_config(cfg->c), buffer, capacity);
}

size_t rcpp_config_out_dir(const rcpp_config* cfg, const char* override,
                           char* buffer, size_t capacity) {
    if (!cfg) return 0;
    std::string dir;
    if (override && override[0] != '\0') {
        dir = override;
    } else if (cfg->c.output.directory_explicit) {
        dir = cfg->c.output.directory;
    } else if (const char* env = std::getenv("RCPP_OUT_DIR");
               env && env[0] != '\0') {
        dir = env;
    } else {
        dir = cfg->c.output.directory;
    }
    return copy_out(dir, buffer, capacity);
}

void rcpp_config_free(rcpp_config* cfg) { delete cfg; }

/* ---- runs ---- */

rcpp_status rcpp_run(const rcpp_config* cfg, const char* algorithm,
                     uint64_t seed, rcpp_trace** out) {
    if (rcpp_status s = require(
            cfg != nullptr && algorithm != nullptr && out != nullptr,
            "NULL argument");
        s)
        return s;
    *out = nullptr;
    return guarded([&] {
        const auto issues = rcpp::validate_config(cfg->c);
        if (!issues.empty()) {
            std::string what = "config has " + std::to_string(issues.size()) +
                               " problem(s)";
            for (const auto& i : issues) what += "\n  " + i;
            throw rcpp::ParseError(what, issues);
        }
        const auto algo = rcpp::algorithm_from_string(algorithm);
        const auto mixing = rcpp::build_mixing_pair(cfg->c.graph);
        const auto problem =
            rcpp::build_problem(cfg->c.problem, cfg->c.graph.n);
        const auto solver_cfg = rcpp::build_solver_config(cfg->c);
        rcpp::validate_solver_config(solver_cfg, mixing, problem);
        auto result = rcpp::run(problem, mixing, solver_cfg, algo, seed);
        const bool diverged = result.diverged;
        const std::string message = result.message;
        *out = new rcpp_trace{std::move(result)};
        if (diverged) {
            set_error(message);
            return RCPP_ERROR_DIVERGED;
        }
        return RCPP_OK;
    });
}

int64_t rcpp_trace_length(const rcpp_trace* t) {
    return t ? static_cast<int64_t>(t->r.records.size()) : 0;
}

rcpp_status rcpp_trace_record(const rcpp_trace* t, int64_t index,
                              rcpp_iter_record* out) {
    if (rcpp_status s = require(t != nullptr && out != nullptr, "NULL argument");
        s)
        return s;
    if (index < 0 || index >= static_cast<int64_t>(t->r.records.size())) {
        set_error("trace index out of range");
        return RCPP_ERROR_INVALID_ARGUMENT;
    }
    const auto& r = t->r.records[static_cast<std::size_t>(index)];
    out->k = r.k;
    out->residual = r.residual;
    out->consensus_err = r.consensus_err;
    out->tracking_err = r.tracking_err;
    out->comp_err_x = r.comp_err_x;
    out->comp_err_y = r.comp_err_y;
    out->bits_cum = r.bits_cum;
    return RCPP_OK;
}

int rcpp_trace_diverged(const rcpp_trace* t) {
    return (t && t->r.diverged) ? 1 : 0;
}

rcpp_status rcpp_trace_write_csv(const rcpp_trace* t, const char* path) {
    if (rcpp_status s = require(t != nullptr && path != nullptr, "NULL argument");
        s)
        return s;
    return guarded([&] {
        std::ofstream out(path);
        if (!out) throw rcpp::IoError("cannot open '" + std::string(path) +
                                      "' for writing");
        rcpp::write_trace_csv(out, t->r.records);
        return RCPP_OK;
    });
}

rcpp_status rcpp_trace_fit_rate(const rcpp_trace* t, int64_t burn_in,
                                double* c_hat, double* r2) {
    if (rcpp_status s = require(t != nullptr, "trace must not be NULL"); s)
        return s;
    std::vector<double> residuals;
    residuals.reserve(t->r.records.size());
    for (const auto& r : t->r.records) residuals.push_back(r.residual);
    const long burn = burn_in >= 0
                          ? static_cast<long>(burn_in)
                          : static_cast<long>(residuals.size()) / 10;
    const auto fit = rcpp::fit_rate(residuals, burn);
    if (!fit) {
        set_error("too few residuals above the numerical floor for a fit");
        return RCPP_ERROR_UNAVAILABLE;
    }
    if (c_hat) *c_hat = fit->c_hat;
    if (r2) *r2 = fit->r2;
    return RCPP_OK;
}

void rcpp_trace_free(rcpp_trace* t) { delete t; }

/* ---- experiments ---- */

rcpp_status rcpp_experiment_run(const rcpp_config* cfg, const char* out_dir,
                                int workers, rcpp_report** out) {
    if (rcpp_status s = require(
            cfg != nullptr && out_dir != nullptr && out != nullptr,
            "NULL argument");
        s)
        return s;
    return guarded([&] {
        auto report = rcpp::run_experiment(cfg->c, out_dir, workers);
        auto* wrapper = new rcpp_report{std::move(report), ""};
        wrapper->text = rcpp::format_report(wrapper->rep);
        *out = wrapper;
        return RCPP_OK;
    });
}

size_t rcpp_report_text(const rcpp_report* r, char* buffer, size_t capacity) {
    if (!r) return 0;
    return copy_out(r->text, buffer, capacity);
}

int rcpp_report_any_diverged(const rcpp_report* r) {
    return (r && r->rep.any_diverged) ? 1 : 0;
}

void rcpp_report_free(rcpp_report* r) { delete r; }

/* ---- certification ---- */

rcpp_status rcpp_certify(const char* kind, int dim, int bits, int k,
                         double level, long samples, uint64_t seed,
                         rcpp_certify_outcome* out, char* table,
                         size_t table_capacity) {
    if (rcpp_status s =
            require(kind != nullptr && out != nullptr, "NULL argument");
        s)
        return s;
    return guarded([&] {
        const auto summary =
            rcpp::run_certify(kind, dim, bits, k, level, samples, seed);
        out->c_rel_hat = summary.result.c_rel_hat;
        out->sigma2_hat = summary.result.sigma2_hat;
        out->delta_hat = summary.result.delta_hat;
        out->sigma2_r_hat = summary.result.sigma2_r_hat;
        out->c_rel_declared = summary.compressor.c_rel;
        out->sigma2_declared = summary.compressor.sigma2;
        out->r_declared = summary.compressor.r;
        out->delta_declared = summary.compressor.delta;
        out->sigma2_r_declared = summary.compressor.sigma2_r;
        out->direct_pass = summary.result.direct_pass ? 1 : 0;
        out->scaled_pass = summary.result.scaled_pass ? 1 : 0;
        if (table) copy_out(summary.table, table, table_capacity);
        return RCPP_OK;
    });
}

}  // extern "C"
