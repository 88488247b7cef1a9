// Exact computation of the stochastic-gradient bias epsilon for both
// objectives, with respect to the q classifier's own parameters (the
// character embeddings, both LSTMs, and the two output matrices; the word
// embeddings are shared with p and sit outside the disjoint-parameter
// setting the bias formulas assume).
//
// For a partition of the data into K equal batches and the losses
// l = -J, the identity  grad l_N = (1/K) sum_k grad l_k + epsilon  holds
// with
//
//   variational: epsilon = (1/K) sum_k sum_z log2(q_hat(z)/q_hat_k(z)) grad q_hat_k(z)
//   gen_brown:   epsilon = (1/K) sum_k [ sum_z log2(q_hat(z)/q_hat_k(z)) grad q_hat_k(z)
//                          - sum_{z,z'} log2(mu(z,z')/mu_k(z,z')) grad mu_k(z,z') ]
//
// where q_hat_k and mu_k are the batch-local mean Q row and mean joint.
// Both are evaluated by weighted backward passes (the log ratios are the
// output cotangents), so memory stays O(params).

#ifndef MIMAX_BIAS_AUDIT_HPP
#define MIMAX_BIAS_AUDIT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mimax/corpus.hpp"
#include "mimax/model.hpp"
#include "mimax/objectives.hpp"

namespace mimax::bias {

struct BiasReport {
    objectives::Objective objective;
    std::size_t num_batches = 0;  // K
    std::size_t batch_size = 0;   // M
    model::GradientSet epsilon;   // nonzero only on q-exclusive arrays
    double epsilon_norm = 0.0;    // L2 over q-exclusive entries
    double avg_grad_norm = 0.0;   // L2 of (1/K) sum_k grad l_k, same restriction
    double direct_residual = 0.0;  // max-abs of grad l_N - [avg + epsilon]
};

// The bias formulas alone (no differencing cross-check).
model::GradientSet variational_bias(const model::ModelParams &params,
                                    const corpus::Vocab &vocab,
                                    const std::vector<corpus::Batch> &partition);
model::GradientSet gen_brown_bias(const model::ModelParams &params, const corpus::Vocab &vocab,
                                  const std::vector<corpus::Batch> &partition);

// Formula epsilon plus the direct gradient-differencing residual.
BiasReport audit(const model::ModelParams &params, const corpus::Vocab &vocab,
                 const std::vector<corpus::Batch> &partition, objectives::Objective objective);

struct ScalingRow {
    std::string objective;
    std::size_t total = 0;       // N
    std::size_t num_batches = 0;  // K
    std::size_t batch_size = 0;   // M
    std::uint64_t seed = 0;
    double eps_norm = 0.0;
    double grad_norm = 0.0;
    double residual = 0.0;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    std::vector<std::string> warnings;  // skipped batch sizes
};

// Fresh seeded partition per (M, seed); one row per objective.
ScalingReport bias_scaling_report(const model::ModelParams &params, const corpus::Vocab &vocab,
                                  const std::vector<corpus::ContextWordPair> &pairs,
                                  const std::vector<std::size_t> &batch_sizes,
                                  std::size_t num_seeds);

// Mean eps/grad norms per (objective, M) over a report's rows.
struct ScalingSummary {
    std::string objective;
    std::size_t batch_size = 0;
    double mean_eps_norm = 0.0;
    double mean_grad_norm = 0.0;
};
std::vector<ScalingSummary> summarize(const ScalingReport &report);

}  // namespace mimax::bias

#endif  // MIMAX_BIAS_AUDIT_HPP
