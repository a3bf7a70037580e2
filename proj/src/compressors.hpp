#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"

namespace rcpp {

// s_k = sqrt(c0 * c^k): positive and non-increasing. c = 1 keeps the scale
// constant (the static-scaling ablation).
struct ScalingSchedule {
    double c0 = 1.0;
    double c = 1.0;

    double at(long k) const;
};

enum class CompressorKind { kIdentity, kQn, kTopK, kQTn, kUniform };

std::string to_string(CompressorKind kind);
CompressorKind compressor_kind_from_string(const std::string& name);

// A compression operator together with its declared error-contract
// constants:
//   E||C(x) - x||^2     <= c_rel * ||x||^2 + sigma2
//   E||C(x)/r - x||^2   <= (1 - delta) * ||x||^2 + sigma2_r
// and a deterministic transmitted-bit model.
struct Compressor {
    CompressorKind kind = CompressorKind::kIdentity;
    int dim = 1;        // vectors this operator is applied to
    int bits = 2;       // qn / qtn
    int k = 1;          // topk / qtn
    double level = 1.0; // uniform

    double c_rel = 0.0;
    double sigma2 = 0.0;
    double r = 1.0;
    double delta = 1.0;
    double sigma2_r = 0.0;

    Eigen::VectorXd apply(const Eigen::VectorXd& x, CounterRng& rng) const;
    std::uint64_t bit_cost(const Eigen::VectorXd& x) const;
};

// Stand-alone operators (apply() dispatches to these).

// b-bit infinity-norm quantization with the randomized norm map
// h(t) = floor(t)+1 with probability t-floor(t), floor(t) otherwise:
//   out = h(||x||_inf)/2^(b-1) * sign(x) .* floor(2^(b-1)|x|/||x||_inf + u),
// u uniform on [0,1)^d. Unbiased; zero in, zero out.
Eigen::VectorXd quantize_inf_norm(const Eigen::VectorXd& x, int bits,
                                  CounterRng& rng);

// Keeps the k largest-magnitude entries, zeroes the rest; ties broken by
// lowest index.
Eigen::VectorXd top_k(const Eigen::VectorXd& x, int k);

// top_k followed by quantize_inf_norm on the sparse result.
Eigen::VectorXd quantize_topk(const Eigen::VectorXd& x, int bits, int k,
                              CounterRng& rng);

// Rounds each entry to the nearest multiple of `level`, ties toward +inf.
// Per-entry error <= level/2, so sigma2 = d*level^2/4 with no relative term.
Eigen::VectorXd uniform_quantizer(const Eigen::VectorXd& x, double level);

// Transmitted-bit models (see README for the accounting rules).
std::uint64_t qn_bit_cost(const Eigen::VectorXd& x, int bits);
std::uint64_t qtn_bit_cost(const Eigen::VectorXd& x, int bits, int k);
std::uint64_t topk_bit_cost(int dim, int k);
std::uint64_t uniform_bit_cost(const Eigen::VectorXd& x, double level);
std::uint64_t raw_bit_cost(int dim);  // 64-bit entries, the uncompressed model

struct ScaledCompression {
    Eigen::VectorXd payload;    // C(x / s); what is transmitted
    Eigen::VectorXd recovered;  // s * payload; reconstructed at the receiver
};

// Dynamic scaling: compress x/s, transmit the payload, recover s*payload.
// Shrinks the absolute error term from sigma2 to s^2*sigma2.
ScaledCompression dynamic_scale(const Compressor& comp,
                                const Eigen::VectorXd& x, double s,
                                CounterRng& rng);

// Constructs an operator with its declared contract constants at dimension
// d. Constants for identity/topk/uniform are exact; qn and qtn have no
// closed form, so they are estimated by a short seeded certification run
// and declared with a safety margin (deterministic per (kind, d, b, k)).
Compressor make_compressor(CompressorKind kind, int dim, int bits, int k,
                           double level);

struct CertifyScale {
    double norm = 0.0;       // ||x|| of the probe vectors
    double mean_abs = 0.0;   // sample mean of ||C(x) - x||^2
    double se_abs = 0.0;     // standard error of that mean
    double bound_abs = 0.0;  // declared c_rel*||x||^2 + sigma2
    double mean_rel = 0.0;   // sample mean of ||C(x)/r - x||^2
    double se_rel = 0.0;
    double bound_rel = 0.0;  // declared (1-delta)*||x||^2 + sigma2_r
};

struct CertifyResult {
    double c_rel_hat = 0.0;
    double sigma2_hat = 0.0;
    double delta_hat = 0.0;
    double sigma2_r_hat = 0.0;
    double c_rel_se = 0.0;
    double sigma2_se = 0.0;
    double delta_se = 0.0;
    double sigma2_r_se = 0.0;
    std::vector<CertifyScale> scales;
    bool direct_pass = false;  // declared constants dominate within 3 se
    bool scaled_pass = false;
    bool pass() const { return direct_pass && scaled_pass; }
};

// Monte-Carlo estimate of the contract constants at magnitudes
// ||x|| in {0, 1e-3, 1, 1e3}, N samples per magnitude, plus a check that
// the declared constants dominate every per-scale sample mean within three
// standard errors. Statistical failure is reported, never thrown.
CertifyResult certify_compressor(const Compressor& comp, int dim, long samples,
                                 std::uint64_t seed);

}  // namespace rcpp
