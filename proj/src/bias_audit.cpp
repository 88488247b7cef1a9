#include "mimax/bias_audit.hpp"

#include <cmath>
#include <unordered_map>

#include "mimax/errors.hpp"

namespace mimax::bias {

namespace {

using model::GradientSet;
using model::ModelParams;
using objectives::Objective;

// log2(full/batch) with an exact-zero short circuit so that partitions
// whose batch statistics coincide bitwise produce an exactly zero bias.
inline double log2_ratio(double full, double batch) {
    if (full == batch) return 0.0;
    return std::log2(full) - std::log2(batch);
}

// Mean over per-batch statistic vectors. When every batch agrees bitwise
// the common vector is returned unchanged, again for exact zeros.
std::vector<double> exact_mean(const std::vector<std::vector<double>> &stats) {
    bool all_equal = true;
    for (std::size_t k = 1; k < stats.size() && all_equal; ++k)
        all_equal = stats[k] == stats[0];
    if (all_equal) return stats[0];
    std::vector<double> mean(stats[0].size(), 0.0);
    for (const std::vector<double> &s : stats)
        for (std::size_t i = 0; i < s.size(); ++i) mean[i] += s[i];
    const double inv = 1.0 / static_cast<double>(stats.size());
    for (double &v : mean) v *= inv;
    return mean;
}

void check_partition(const std::vector<corpus::Batch> &partition) {
    if (partition.empty()) throw ValidationError("partition is empty");
    const std::size_t batch_size = partition[0].pairs.size();
    if (batch_size == 0) throw ValidationError("partition contains an empty batch");
    for (const corpus::Batch &batch : partition)
        if (batch.pairs.size() != batch_size)
            throw ValidationError("bias audit requires equal batch sizes (theorem setting); got " +
                                  std::to_string(batch.pairs.size()) + " vs " +
                                  std::to_string(batch_size));
}

struct BatchStats {
    std::vector<double> q_hat;
    std::vector<double> p_hat;
    std::vector<double> mu;  // only filled for gen_brown
};

void zero_non_q_arrays(GradientSet &grads) {
    model::for_each_array(grads, [](const std::string &name, Matrix &m) {
        if (!model::is_q_exclusive(name)) m.fill(0.0);
    });
}

GradientSet bias_formula(const ModelParams &params, const corpus::Vocab &vocab,
                         const std::vector<corpus::Batch> &partition, Objective objective) {
    check_partition(partition);
    const std::size_t num_batches = partition.size();
    const std::size_t batch_size = partition[0].pairs.size();
    const std::size_t m = static_cast<std::size_t>(params.hyper.labels);
    const bool with_joint = objective == Objective::gen_brown;

    // Pass 1: per-batch means.
    std::vector<BatchStats> stats(num_batches);
    std::vector<std::vector<double>> q_hats(num_batches), p_hats(num_batches), mus;
    if (with_joint) mus.resize(num_batches);
    for (std::size_t k = 0; k < num_batches; ++k) {
        const objectives::BatchForward fwd =
            objectives::batch_forward(params, partition[k], vocab);
        q_hats[k] = fwd.q_hat;
        p_hats[k] = fwd.p_hat;
        if (with_joint) mus[k] = objectives::mean_joint(fwd);
    }
    const std::vector<double> q_hat = exact_mean(q_hats);
    std::vector<double> mu;
    if (with_joint) mu = exact_mean(mus);

    // Pass 2: weighted backward accumulation, one batch at a time.
    GradientSet epsilon = model::zeros_like(params);
    const double share = 1.0 / static_cast<double>(num_batches * batch_size);
    std::vector<double> c_weight(m), a_weight;
    for (std::size_t k = 0; k < num_batches; ++k) {
        bool any_nonzero = false;
        for (std::size_t z = 0; z < m; ++z) {
            c_weight[z] = log2_ratio(q_hat[z], q_hats[k][z]);
            any_nonzero = any_nonzero || c_weight[z] != 0.0;
        }
        if (with_joint) {
            a_weight.assign(m * m, 0.0);
            for (std::size_t i = 0; i < m * m; ++i) {
                a_weight[i] = log2_ratio(mu[i], mus[k][i]);
                any_nonzero = any_nonzero || a_weight[i] != 0.0;
            }
        }
        if (!any_nonzero) continue;

        std::vector<model::WordTape> tapes;
        std::unordered_map<std::int32_t, std::size_t> tape_of;
        std::vector<std::vector<double>> cotangent;
        std::vector<double> u(m);
        for (const corpus::ContextWordPair &pair : partition[k].pairs) {
            auto [it, inserted] = tape_of.try_emplace(pair.word, tapes.size());
            if (inserted) {
                tapes.push_back(model::word_forward_tape(params, pair.word, vocab));
                cotangent.emplace_back(m, 0.0);
            }
            if (with_joint) {
                const std::vector<double> p = model::context_forward(params, pair.context);
                for (std::size_t w = 0; w < m; ++w) {
                    double s = c_weight[w];
                    for (std::size_t z = 0; z < m; ++z) s -= p[z] * a_weight[z * m + w];
                    u[w] = share * s;
                }
            } else {
                for (std::size_t w = 0; w < m; ++w) u[w] = share * c_weight[w];
            }
            std::vector<double> &acc = cotangent[it->second];
            for (std::size_t w = 0; w < m; ++w) acc[w] += u[w];
        }
        for (std::size_t t = 0; t < tapes.size(); ++t) {
            const std::vector<double> dlogits = model::softmax_vjp(tapes[t].probs, cotangent[t]);
            model::word_backward(params, tapes[t], dlogits, epsilon);
        }
    }
    zero_non_q_arrays(epsilon);
    return epsilon;
}

}  // namespace

GradientSet variational_bias(const ModelParams &params, const corpus::Vocab &vocab,
                             const std::vector<corpus::Batch> &partition) {
    return bias_formula(params, vocab, partition, Objective::variational);
}

GradientSet gen_brown_bias(const ModelParams &params, const corpus::Vocab &vocab,
                           const std::vector<corpus::Batch> &partition) {
    return bias_formula(params, vocab, partition, Objective::gen_brown);
}

BiasReport audit(const ModelParams &params, const corpus::Vocab &vocab,
                 const std::vector<corpus::Batch> &partition, Objective objective) {
    BiasReport report;
    report.objective = objective;
    report.num_batches = partition.size();
    report.batch_size = partition.empty() ? 0 : partition[0].pairs.size();
    report.epsilon = bias_formula(params, vocab, partition, objective);
    report.epsilon_norm = model::l2_norm(report.epsilon, /*q_only=*/true);

    // Direct differencing: grad l_N and the average batch gradient, with
    // the loss orientation l = -J.
    corpus::Batch full;
    for (const corpus::Batch &batch : partition)
        full.pairs.insert(full.pairs.end(), batch.pairs.begin(), batch.pairs.end());
    GradientSet full_grad = objectives::objective_gradient(params, full, vocab, objective).second;
    model::scale(full_grad, -1.0);

    GradientSet avg = model::zeros_like(params);
    const double inv_k = 1.0 / static_cast<double>(partition.size());
    for (const corpus::Batch &batch : partition) {
        const GradientSet g = objectives::objective_gradient(params, batch, vocab, objective).second;
        model::axpy(avg, -inv_k, g);
    }
    report.avg_grad_norm = model::l2_norm(avg, /*q_only=*/true);

    model::axpy(full_grad, -1.0, avg);
    model::axpy(full_grad, -1.0, report.epsilon);
    report.direct_residual = model::max_abs_entry(full_grad, /*q_only=*/true);
    return report;
}

ScalingReport bias_scaling_report(const ModelParams &params, const corpus::Vocab &vocab,
                                  const std::vector<corpus::ContextWordPair> &pairs,
                                  const std::vector<std::size_t> &batch_sizes,
                                  std::size_t num_seeds) {
    ScalingReport report;
    for (const std::size_t batch_size : batch_sizes) {
        if (batch_size == 0 || pairs.size() % batch_size != 0) {
            report.warnings.push_back("batch size " + std::to_string(batch_size) +
                                      " does not divide N=" + std::to_string(pairs.size()) +
                                      "; row skipped");
            continue;
        }
        for (std::uint64_t seed = 0; seed < num_seeds; ++seed) {
            const std::vector<corpus::Batch> partition =
                corpus::minibatches(pairs, batch_size, seed);
            for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
                const BiasReport audit_result = audit(params, vocab, partition, objective);
                ScalingRow row;
                row.objective = objectives::objective_name(objective);
                row.total = pairs.size();
                row.num_batches = partition.size();
                row.batch_size = batch_size;
                row.seed = seed;
                row.eps_norm = audit_result.epsilon_norm;
                row.grad_norm = audit_result.avg_grad_norm;
                row.residual = audit_result.direct_residual;
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

std::vector<ScalingSummary> summarize(const ScalingReport &report) {
    std::vector<ScalingSummary> out;
    for (const ScalingRow &row : report.rows) {
        ScalingSummary *entry = nullptr;
        for (ScalingSummary &s : out)
            if (s.objective == row.objective && s.batch_size == row.batch_size) entry = &s;
        if (entry == nullptr) {
            out.push_back({row.objective, row.batch_size, 0.0, 0.0});
            entry = &out.back();
        }
        entry->mean_eps_norm += row.eps_norm;
        entry->mean_grad_norm += row.grad_norm;
    }
    for (ScalingSummary &s : out) {
        std::size_t count = 0;
        for (const ScalingRow &row : report.rows)
            if (row.objective == s.objective && row.batch_size == s.batch_size) ++count;
        if (count > 0) {
            s.mean_eps_norm /= static_cast<double>(count);
            s.mean_grad_norm /= static_cast<double>(count);
        }
    }
    return out;
}

}  // namespace mimax::bias
