#include "config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "compressors.hpp"
#include "errors.hpp"
#include "solver.hpp"

namespace rcpp {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Shortest representation that parses back to the same double.
std::string render_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& v) {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
}

long parse_long(const std::string& v) {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
}

std::uint64_t parse_u64(const std::string& v) {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return x;
}

// Setter table: maps "section.key" to a value parser. A setter throws
// std::exception on a malformed value; range checking happens later in
// validate_config so every violation is reported together.
using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"graph.kind",
         [](ExperimentConfig& c, const std::string& v) { c.graph.kind = v; }},
        {"graph.n",
         [](ExperimentConfig& c, const std::string& v) {
             c.graph.n = static_cast<int>(parse_long(v));
         }},
        {"graph.extra_edges",
         [](ExperimentConfig& c, const std::string& v) {
             c.graph.extra_edges = static_cast<int>(parse_long(v));
         }},
        {"graph.seed",
         [](ExperimentConfig& c, const std::string& v) {
             c.graph.seed = parse_u64(v);
         }},
        {"graph.perturb",
         [](ExperimentConfig& c, const std::string& v) {
             c.graph.perturb = parse_double(v);
         }},
        {"problem.p",
         [](ExperimentConfig& c, const std::string& v) {
             c.problem.p = static_cast<int>(parse_long(v));
         }},
        {"problem.rho",
         [](ExperimentConfig& c, const std::string& v) {
             c.problem.rho = parse_double(v);
         }},
        {"problem.noise",
         [](ExperimentConfig& c, const std::string& v) {
             c.problem.noise = parse_double(v);
         }},
        {"problem.seed",
         [](ExperimentConfig& c, const std::string& v) {
             c.problem.seed = parse_u64(v);
         }},
        {"algorithm.name",
         [](ExperimentConfig& c, const std::string& v) {
             c.algorithm.names = split_list(v);
         }},
        {"algorithm.lambda",
         [](ExperimentConfig& c, const std::string& v) {
             std::vector<double> l;
             for (const auto& item : split_list(v)) {
                 l.push_back(parse_double(item));
             }
             if (l.empty()) throw std::invalid_argument(v);
             c.algorithm.lambda = std::move(l);
         }},
        {"algorithm.alpha_x",
         [](ExperimentConfig& c, const std::string& v) {
             c.algorithm.alpha_x = parse_double(v);
         }},
        {"algorithm.alpha_y",
         [](ExperimentConfig& c, const std::string& v) {
             c.algorithm.alpha_y = parse_double(v);
         }},
        {"algorithm.gamma_x",
         [](ExperimentConfig& c, const std::string& v) {
             c.algorithm.gamma_x = parse_double(v);
         }},
        {"algorithm.gamma_y",
         [](ExperimentConfig& c, const std::string& v) {
             c.algorithm.gamma_y = parse_double(v);
         }},
        {"algorithm.c0",
         [](ExperimentConfig& c, const std::string& v) {
             c.algorithm.c0 = parse_double(v);
         }},
        {"algorithm.c",
         [](ExperimentConfig& c, const std::string& v) {
             c.algorithm.c = parse_double(v);
         }},
        {"algorithm.iterations",
         [](ExperimentConfig& c, const std::string& v) {
             c.algorithm.iterations = parse_long(v);
         }},
        {"compressor.kind",
         [](ExperimentConfig& c, const std::string& v) {
             c.compressor.kind = v;
         }},
        {"compressor.b",
         [](ExperimentConfig& c, const std::string& v) {
             c.compressor.b = static_cast<int>(parse_long(v));
         }},
        {"compressor.k",
         [](ExperimentConfig& c, const std::string& v) {
             c.compressor.k = static_cast<int>(parse_long(v));
         }},
        {"compressor.level",
         [](ExperimentConfig& c, const std::string& v) {
             c.compressor.level = parse_double(v);
         }},
        {"output.directory",
         [](ExperimentConfig& c, const std::string& v) {
             c.output.directory = v;
             c.output.directory_explicit = true;
         }},
        {"output.seeds",
         [](ExperimentConfig& c, const std::string& v) {
             std::vector<std::uint64_t> s;
             for (const auto& item : split_list(v)) {
                 s.push_back(parse_u64(item));
             }
             if (s.empty()) throw std::invalid_argument(v);
             c.output.seeds = std::move(s);
         }},
        {"output.fit_burn_in",
         [](ExperimentConfig& c, const std::string& v) {
             c.output.fit_burn_in = parse_long(v);
         }},
        {"output.residual_target",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "none") {
                 c.output.has_residual_target = false;
                 c.output.residual_target = 0.0;
             } else {
                 c.output.has_residual_target = true;
                 c.output.residual_target = parse_double(v);
             }
         }},
    };
    return table;
}

const std::set<std::string>& known_sections() {
    static const std::set<std::string> s = {"graph", "problem", "algorithm",
                                            "compressor", "output"};
    return s;
}

}  // namespace

ExperimentConfig parse_config_text(std::istream& in,
                                   std::vector<std::string>& issues) {
    ExperimentConfig cfg;
    std::string line;
    std::string section;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                issues.push_back("line " + std::to_string(lineno) +
                                 ": unterminated section header '" + line +
                                 "'");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!known_sections().count(section)) {
                issues.push_back("line " + std::to_string(lineno) +
                                 ": unknown section [" + section +
                                 "]; choices: graph, problem, algorithm, "
                                 "compressor, output");
                section.clear();
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            issues.push_back("line " + std::to_string(lineno) +
                             ": expected 'key = value', got '" + line + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            issues.push_back("line " + std::to_string(lineno) + ": key '" +
                             key + "' appears before any [section] header");
            continue;
        }
        const std::string path = section + "." + key;
        const auto it = setters().find(path);
        if (it == setters().end()) {
            issues.push_back("line " + std::to_string(lineno) +
                             ": unknown key '" + path + "'");
            continue;
        }
        if (!seen.insert(path).second) {
            issues.push_back("line " + std::to_string(lineno) +
                             ": duplicate key '" + path + "'");
            continue;
        }
        try {
            it->second(cfg, value);
        } catch (const std::exception&) {
            issues.push_back("line " + std::to_string(lineno) + ": key '" +
                             path + "': cannot parse value '" + value + "'");
        }
    }
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& dotted_key,
                    const std::string& value) {
    const auto it = setters().find(trim(dotted_key));
    if (it == setters().end()) {
        throw InvalidArgument("unknown config key '" + dotted_key + "'");
    }
    try {
        it->second(cfg, trim(value));
    } catch (const std::exception&) {
        throw InvalidArgument("key '" + dotted_key +
                              "': cannot parse value '" + value + "'");
    }
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> issues;
    auto bad = [&issues](const std::string& msg) { issues.push_back(msg); };

    if (cfg.graph.kind != "ring") {
        bad("graph.kind: unknown topology '" + cfg.graph.kind +
            "'; choices: ring");
    }
    if (cfg.graph.n < 1) bad("graph.n: need at least one node");
    const long long slots = cfg.graph.n >= 1
                                ? static_cast<long long>(cfg.graph.n) *
                                          (cfg.graph.n - 1) -
                                      cfg.graph.n
                                : 0;
    if (cfg.graph.extra_edges < 0 ||
        cfg.graph.extra_edges > std::max(slots, 0LL)) {
        bad("graph.extra_edges: must be in [0, " +
            std::to_string(std::max(slots, 0LL)) + "]");
    }
    if (cfg.graph.perturb < 0.0) bad("graph.perturb: must be nonnegative");

    if (cfg.problem.p < 1) bad("problem.p: dimension must be >= 1");
    if (!(cfg.problem.rho > 0.0)) bad("problem.rho: must be positive");
    if (cfg.problem.noise < 0.0) bad("problem.noise: must be nonnegative");

    if (cfg.algorithm.names.empty()) {
        bad("algorithm.name: need at least one algorithm");
    }
    std::set<std::string> unique_names;
    for (const auto& name : cfg.algorithm.names) {
        if (name != "rcpp" && name != "pushpull" && name != "rcpp_static") {
            bad("algorithm.name: unknown algorithm '" + name +
                "'; choices: rcpp, pushpull, rcpp_static");
        }
        if (!unique_names.insert(name).second) {
            bad("algorithm.name: duplicate '" + name + "'");
        }
    }
    if (cfg.algorithm.lambda.empty()) {
        bad("algorithm.lambda: need a scalar or one value per agent");
    } else if (cfg.algorithm.lambda.size() != 1 &&
               static_cast<int>(cfg.algorithm.lambda.size()) != cfg.graph.n) {
        bad("algorithm.lambda: need 1 or graph.n = " +
            std::to_string(cfg.graph.n) + " values, got " +
            std::to_string(cfg.algorithm.lambda.size()));
    }
    for (double l : cfg.algorithm.lambda) {
        if (!(l > 0.0)) {
            bad("algorithm.lambda: step sizes must be positive");
            break;
        }
    }
    if (!(cfg.algorithm.gamma_x > 0.0) || cfg.algorithm.gamma_x > 1.0) {
        bad("algorithm.gamma_x: must be in (0, 1]");
    }
    if (!(cfg.algorithm.gamma_y > 0.0) || cfg.algorithm.gamma_y > 1.0) {
        bad("algorithm.gamma_y: must be in (0, 1]");
    }
    if (!(cfg.algorithm.c0 > 0.0)) bad("algorithm.c0: must be positive");
    if (!(cfg.algorithm.c > 0.0) || cfg.algorithm.c > 1.0) {
        bad("algorithm.c: must be in (0, 1]");
    }
    if (cfg.algorithm.iterations < 0) {
        bad("algorithm.iterations: must be nonnegative");
    }

    bool compressor_ok = true;
    try {
        compressor_kind_from_string(cfg.compressor.kind);
    } catch (const InvalidArgument& e) {
        bad(std::string("compressor.kind: ") + e.what());
        compressor_ok = false;
    }
    if (cfg.compressor.b < 1 || cfg.compressor.b > 62) {
        bad("compressor.b: must be in [1, 62]");
        compressor_ok = false;
    }
    if (cfg.problem.p >= 1 &&
        (cfg.compressor.k < 1 || cfg.compressor.k > cfg.problem.p)) {
        bad("compressor.k: must be in [1, problem.p = " +
            std::to_string(cfg.problem.p) + "]");
        compressor_ok = false;
    }
    if (!(cfg.compressor.level > 0.0)) {
        bad("compressor.level: must be positive");
        compressor_ok = false;
    }

    // alpha range depends on the operator's scaling constant r.
    if (compressor_ok && cfg.problem.p >= 1) {
        try {
            const Compressor comp = make_compressor(
                compressor_kind_from_string(cfg.compressor.kind),
                cfg.problem.p, cfg.compressor.b, cfg.compressor.k,
                cfg.compressor.level);
            const double inv_r = 1.0 / comp.r;
            if (!(cfg.algorithm.alpha_x > 0.0) ||
                cfg.algorithm.alpha_x > inv_r) {
                bad("algorithm.alpha_x: must be in (0, 1/r] = (0, " +
                    render_double(inv_r) + "] for this compressor");
            }
            if (!(cfg.algorithm.alpha_y > 0.0) ||
                cfg.algorithm.alpha_y > inv_r) {
                bad("algorithm.alpha_y: must be in (0, 1/r] = (0, " +
                    render_double(inv_r) + "] for this compressor");
            }
        } catch (const InvalidArgument& e) {
            bad(std::string("compressor: ") + e.what());
        }
    }

    if (cfg.output.directory.empty()) {
        bad("output.directory: must not be empty");
    }
    if (cfg.output.seeds.empty()) {
        bad("output.seeds: need at least one seed");
    }
    std::set<std::uint64_t> unique_seeds(cfg.output.seeds.begin(),
                                         cfg.output.seeds.end());
    if (unique_seeds.size() != cfg.output.seeds.size()) {
        bad("output.seeds: duplicate seeds");
    }
    if (cfg.output.fit_burn_in < -1) {
        bad("output.fit_burn_in: must be -1 (auto) or nonnegative");
    }
    if (cfg.output.has_residual_target &&
        !(cfg.output.residual_target > 0.0)) {
        bad("output.residual_target: must be positive or 'none'");
    }
    return issues;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::vector<std::string> issues;
    ExperimentConfig cfg = parse_config_text(in, issues);
    const auto more = validate_config(cfg);
    issues.insert(issues.end(), more.begin(), more.end());
    if (!issues.empty()) {
        std::string what = "config '" + path + "' has " +
                           std::to_string(issues.size()) + " problem(s)";
        for (const auto& s : issues) what += "\n  " + s;
        throw ParseError(what, issues);
    }
    return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) {
        out += k + " = " + v + "\n";
    };

    out += "[graph]\n";
    kv("kind", cfg.graph.kind);
    kv("n", std::to_string(cfg.graph.n));
    kv("extra_edges", std::to_string(cfg.graph.extra_edges));
    kv("seed", std::to_string(cfg.graph.seed));
    kv("perturb", render_double(cfg.graph.perturb));

    out += "\n[problem]\n";
    kv("p", std::to_string(cfg.problem.p));
    kv("rho", render_double(cfg.problem.rho));
    kv("noise", render_double(cfg.problem.noise));
    kv("seed", std::to_string(cfg.problem.seed));

    out += "\n[algorithm]\n";
    std::string names;
    for (const auto& n : cfg.algorithm.names) {
        if (!names.empty()) names += ",";
        names += n;
    }
    kv("name", names);
    std::string lambdas;
    for (double l : cfg.algorithm.lambda) {
        if (!lambdas.empty()) lambdas += ",";
        lambdas += render_double(l);
    }
    kv("lambda", lambdas);
    kv("alpha_x", render_double(cfg.algorithm.alpha_x));
    kv("alpha_y", render_double(cfg.algorithm.alpha_y));
    kv("gamma_x", render_double(cfg.algorithm.gamma_x));
    kv("gamma_y", render_double(cfg.algorithm.gamma_y));
    kv("c0", render_double(cfg.algorithm.c0));
    kv("c", render_double(cfg.algorithm.c));
    kv("iterations", std::to_string(cfg.algorithm.iterations));

    out += "\n[compressor]\n";
    kv("kind", cfg.compressor.kind);
    kv("b", std::to_string(cfg.compressor.b));
    kv("k", std::to_string(cfg.compressor.k));
    kv("level", render_double(cfg.compressor.level));

    out += "\n[output]\n";
    if (cfg.output.directory_explicit) {
        kv("directory", cfg.output.directory);
    }
    std::string seeds;
    for (std::uint64_t s : cfg.output.seeds) {
        if (!seeds.empty()) seeds += ",";
        seeds += std::to_string(s);
    }
    kv("seeds", seeds);
    kv("fit_burn_in", std::to_string(cfg.output.fit_burn_in));
    kv("residual_target", cfg.output.has_residual_target
                              ? render_double(cfg.output.residual_target)
                              : std::string("none"));
    return out;
}

}  // namespace rcpp
