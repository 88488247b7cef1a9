// Batch-level and corpus-level computation of the two training objectives
// and their exact gradients, in bits.
//
// For a batch B with classifier rows P[i] = p(.|x_i) and Q[i] = q(.|y_i):
//
//   variational  J = H(q_hat) - (1/|B|) sum_i sum_z Q[i,z] log2 P[i,z]
//   gen_brown    J = I(mu)  where  mu(z,z') = (1/|B|) sum_i P[i,z] Q[i,z']
//
// with q_hat the mean Q row and I the plug-in mutual information of mu
// against its marginals (the mean P and Q rows). For tied one-hot rows
// over word bigrams the gen_brown value coincides with the count-based
// Brown clustering objective.

#ifndef MIMAX_OBJECTIVES_HPP
#define MIMAX_OBJECTIVES_HPP

#include <string>
#include <utility>
#include <vector>

#include "mimax/corpus.hpp"
#include "mimax/matrix.hpp"
#include "mimax/model.hpp"

namespace mimax::objectives {

enum class Objective { variational, gen_brown };

std::string objective_name(Objective objective);
Objective parse_objective(const std::string &name);  // "var" | "mi"

// Per-example classifier rows plus their means over the batch.
struct BatchForward {
    Matrix p_rows;  // |B| x m
    Matrix q_rows;  // |B| x m
    std::vector<double> p_hat;
    std::vector<double> q_hat;
};

BatchForward batch_forward(const model::ModelParams &params, const corpus::Batch &batch,
                           const corpus::Vocab &vocab);

// mu(z,z') = (1/|B|) sum_i P[i,z] Q[i,z'], row-major m x m.
std::vector<double> mean_joint(const BatchForward &fwd);

double variational_objective(const BatchForward &fwd);
double gen_brown_objective(const BatchForward &fwd);

// Objective value plus exact gradients (ascent direction) with respect to
// every parameter, treating the batch means as functions of the batch.
std::pair<double, model::GradientSet> objective_gradient(const model::ModelParams &params,
                                                         const corpus::Batch &batch,
                                                         const corpus::Vocab &vocab,
                                                         Objective objective);

// The same objective over all pairs, with data-wide means. Streams, so it
// is cheap enough to log every epoch.
double corpus_objective(const model::ModelParams &params,
                        const std::vector<corpus::ContextWordPair> &pairs,
                        const corpus::Vocab &vocab, Objective objective);

}  // namespace mimax::objectives

#endif  // MIMAX_OBJECTIVES_HPP
