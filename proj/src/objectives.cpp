#include "mimax/objectives.hpp"

#include <cmath>
#include <unordered_map>

#include "mimax/errors.hpp"

namespace mimax::objectives {

namespace {

constexpr double kInvLn2 = 1.4426950408889634;  // 1 / ln 2

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

double entropy_bits(const std::vector<double> &p) {
    double h = 0.0;
    for (double v : p) h -= xlog2x(v);
    return h;
}

}  // namespace

std::string objective_name(Objective objective) {
    return objective == Objective::variational ? "variational" : "gen_brown";
}

Objective parse_objective(const std::string &name) {
    if (name == "var" || name == "variational") return Objective::variational;
    if (name == "mi" || name == "gen_brown") return Objective::gen_brown;
    throw ValidationError("unknown objective \"" + name + "\" (expected var or mi)");
}

BatchForward batch_forward(const model::ModelParams &params, const corpus::Batch &batch,
                           const corpus::Vocab &vocab) {
    if (batch.pairs.empty()) throw ValidationError("batch is empty");
    const std::size_t n = batch.pairs.size();
    const std::size_t m = static_cast<std::size_t>(params.hyper.labels);

    BatchForward fwd;
    fwd.p_rows = Matrix(n, m);
    fwd.q_rows = Matrix(n, m);
    fwd.p_hat.assign(m, 0.0);
    fwd.q_hat.assign(m, 0.0);

    // q(.|y) depends only on the word type, so compute it once per type.
    std::unordered_map<std::int32_t, std::vector<double>> q_cache;
    for (std::size_t i = 0; i < n; ++i) {
        const corpus::ContextWordPair &pair = batch.pairs[i];
        const std::vector<double> p = model::context_forward(params, pair.context);
        auto it = q_cache.find(pair.word);
        if (it == q_cache.end())
            it = q_cache.emplace(pair.word, model::word_forward(params, pair.word, vocab)).first;
        for (std::size_t z = 0; z < m; ++z) {
            fwd.p_rows(i, z) = p[z];
            fwd.q_rows(i, z) = it->second[z];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t z = 0; z < m; ++z) {
            fwd.p_hat[z] += fwd.p_rows(i, z);
            fwd.q_hat[z] += fwd.q_rows(i, z);
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t z = 0; z < m; ++z) {
        fwd.p_hat[z] *= inv;
        fwd.q_hat[z] *= inv;
    }
    return fwd;
}

std::vector<double> mean_joint(const BatchForward &fwd) {
    const std::size_t n = fwd.p_rows.rows;
    const std::size_t m = fwd.p_rows.cols;
    std::vector<double> mu(m * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double *p = fwd.p_rows.row(i);
        const double *q = fwd.q_rows.row(i);
        for (std::size_t z = 0; z < m; ++z) {
            if (p[z] == 0.0) continue;
            double *row = mu.data() + z * m;
            for (std::size_t w = 0; w < m; ++w) row[w] += p[z] * q[w];
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double &v : mu) v *= inv;
    return mu;
}

double variational_objective(const BatchForward &fwd) {
    const std::size_t n = fwd.p_rows.rows;
    const std::size_t m = fwd.p_rows.cols;
    double cross = 0.0;  // sum_i sum_z Q[i,z] log2 P[i,z]
    for (std::size_t i = 0; i < n; ++i) {
        const double *p = fwd.p_rows.row(i);
        const double *q = fwd.q_rows.row(i);
        for (std::size_t z = 0; z < m; ++z) {
            if (q[z] == 0.0) continue;
            if (p[z] == 0.0)
                throw InfiniteLossError("cross-entropy term is infinite: p(z|x) = 0 with q > 0");
            cross += q[z] * std::log2(p[z]);
        }
    }
    return entropy_bits(fwd.q_hat) + cross / static_cast<double>(n);
}

double gen_brown_objective(const BatchForward &fwd) {
    const std::size_t m = fwd.p_rows.cols;
    const std::vector<double> mu = mean_joint(fwd);
    double mi = 0.0;
    for (std::size_t z = 0; z < m; ++z) {
        for (std::size_t w = 0; w < m; ++w) {
            const double v = mu[z * m + w];
            if (v == 0.0) continue;
            mi += v * std::log2(v / (fwd.p_hat[z] * fwd.q_hat[w]));
        }
    }
    return mi;
}

namespace {

// Shared gradient kernel. Computes the value, the per-row cotangents of
// the objective with respect to the P and Q rows, and backpropagates them
// through both architectures. Rows for repeated words are grouped: the
// backward pass is linear in the cotangent, so one pass per word type with
// the summed cotangent is exact.
std::pair<double, model::GradientSet> gradient_impl(const model::ModelParams &params,
                                                    const corpus::Batch &batch,
                                                    const corpus::Vocab &vocab,
                                                    Objective objective) {
    if (batch.pairs.empty()) throw ValidationError("batch is empty");
    const std::size_t n = batch.pairs.size();
    const std::size_t m = static_cast<std::size_t>(params.hyper.labels);
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<model::WordTape> tapes;
    std::unordered_map<std::int32_t, std::size_t> tape_of;
    std::vector<std::size_t> word_tape(n);
    Matrix p_rows(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const corpus::ContextWordPair &pair = batch.pairs[i];
        auto [it, inserted] = tape_of.try_emplace(pair.word, tapes.size());
        if (inserted) tapes.push_back(model::word_forward_tape(params, pair.word, vocab));
        word_tape[i] = it->second;
        const std::vector<double> p = model::context_forward(params, pair.context);
        for (std::size_t z = 0; z < m; ++z) p_rows(i, z) = p[z];
    }

    std::vector<double> p_hat(m, 0.0), q_hat(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double *p = p_rows.row(i);
        const std::vector<double> &q = tapes[word_tape[i]].probs;
        for (std::size_t z = 0; z < m; ++z) {
            p_hat[z] += p[z];
            q_hat[z] += q[z];
        }
    }
    for (std::size_t z = 0; z < m; ++z) {
        p_hat[z] *= inv_n;
        q_hat[z] *= inv_n;
    }

    double value = 0.0;
    std::vector<double> mu;             // gen_brown only
    std::vector<double> log_ratio;      // log2( mu / (p_hat q_hat) )
    std::vector<double> log_q_hat(m), log_p_rows;
    if (objective == Objective::gen_brown) {
        mu.assign(m * m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double *p = p_rows.row(i);
            const std::vector<double> &q = tapes[word_tape[i]].probs;
            for (std::size_t z = 0; z < m; ++z) {
                double *row = mu.data() + z * m;
                for (std::size_t w = 0; w < m; ++w) row[w] += p[z] * q[w];
            }
        }
        for (double &v : mu) v *= inv_n;
        log_ratio.assign(m * m, 0.0);
        for (std::size_t z = 0; z < m; ++z) {
            for (std::size_t w = 0; w < m; ++w) {
                const double v = mu[z * m + w];
                if (v == 0.0) continue;
                const double r = std::log2(v / (p_hat[z] * q_hat[w]));
                log_ratio[z * m + w] = r;
                value += v * r;
            }
        }
    } else {
        for (std::size_t z = 0; z < m; ++z) {
            value -= xlog2x(q_hat[z]);
            log_q_hat[z] = q_hat[z] > 0.0 ? std::log2(q_hat[z]) : 0.0;
        }
        double cross = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double *p = p_rows.row(i);
            const std::vector<double> &q = tapes[word_tape[i]].probs;
            for (std::size_t z = 0; z < m; ++z) {
                if (q[z] == 0.0) continue;
                if (p[z] == 0.0)
                    throw InfiniteLossError("cross-entropy term is infinite in gradient");
                cross += q[z] * std::log2(p[z]);
            }
        }
        value += cross * inv_n;
    }

    model::GradientSet grads = model::zeros_like(params);
    std::vector<std::vector<double>> q_cotangent(tapes.size(), std::vector<double>(m, 0.0));
    std::vector<double> dp(m), dq(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double *p = p_rows.row(i);
        const std::vector<double> &q = tapes[word_tape[i]].probs;
        if (objective == Objective::gen_brown) {
            // dJ/dP[i,z] = (1/n) sum_w Q[i,w] L(z,w), dJ/dQ[i,w] = (1/n) sum_z P[i,z] L(z,w)
            for (std::size_t z = 0; z < m; ++z) {
                double s = 0.0;
                const double *row = log_ratio.data() + z * m;
                for (std::size_t w = 0; w < m; ++w) s += q[w] * row[w];
                dp[z] = inv_n * s;
            }
            for (std::size_t w = 0; w < m; ++w) {
                double s = 0.0;
                for (std::size_t z = 0; z < m; ++z) s += p[z] * log_ratio[z * m + w];
                dq[w] = inv_n * s;
            }
        } else {
            // J = -sum_z q_hat log2 q_hat + (1/n) sum_i sum_z Q[i,z] log2 P[i,z]
            // dJ/dQ[i,z] = (1/n)(-log2 q_hat(z) - 1/ln2 + log2 P[i,z])
            // dJ/dP[i,z] = (1/n) Q[i,z] / (P[i,z] ln 2)
            for (std::size_t z = 0; z < m; ++z) {
                dq[z] = inv_n * (-log_q_hat[z] - kInvLn2 + std::log2(p[z]));
                dp[z] = inv_n * q[z] * kInvLn2 / p[z];
            }
        }
        const std::vector<double> p_vec(p, p + m);
        const std::vector<double> dlogits_p = model::softmax_vjp(p_vec, dp);
        model::context_backward(params, batch.pairs[i].context, dlogits_p, grads);
        std::vector<double> &acc = q_cotangent[word_tape[i]];
        for (std::size_t z = 0; z < m; ++z) acc[z] += dq[z];
    }
    for (std::size_t t = 0; t < tapes.size(); ++t) {
        const std::vector<double> dlogits_q = model::softmax_vjp(tapes[t].probs, q_cotangent[t]);
        model::word_backward(params, tapes[t], dlogits_q, grads);
    }

    bool finite = true;
    std::string bad_array;
    model::for_each_array(grads, [&](const std::string &name, const Matrix &mat) {
        if (!finite) return;
        for (double v : mat.a) {
            if (!std::isfinite(v)) {
                finite = false;
                bad_array = name;
                return;
            }
        }
    });
    if (!finite || !std::isfinite(value))
        throw Error("non-finite gradient in " + (finite ? "objective value" : bad_array));
    return {value, std::move(grads)};
}

}  // namespace

std::pair<double, model::GradientSet> objective_gradient(const model::ModelParams &params,
                                                         const corpus::Batch &batch,
                                                         const corpus::Vocab &vocab,
                                                         Objective objective) {
    return gradient_impl(params, batch, vocab, objective);
}

double corpus_objective(const model::ModelParams &params,
                        const std::vector<corpus::ContextWordPair> &pairs,
                        const corpus::Vocab &vocab, Objective objective) {
    if (pairs.empty()) throw ValidationError("pair list is empty");
    const std::size_t m = static_cast<std::size_t>(params.hyper.labels);
    const double inv_n = 1.0 / static_cast<double>(pairs.size());

    std::unordered_map<std::int32_t, std::vector<double>> q_cache;
    std::vector<double> p_hat(m, 0.0), q_hat(m, 0.0);
    std::vector<double> mu;
    if (objective == Objective::gen_brown) mu.assign(m * m, 0.0);
    double cross = 0.0;

    for (const corpus::ContextWordPair &pair : pairs) {
        const std::vector<double> p = model::context_forward(params, pair.context);
        auto it = q_cache.find(pair.word);
        if (it == q_cache.end())
            it = q_cache.emplace(pair.word, model::word_forward(params, pair.word, vocab)).first;
        const std::vector<double> &q = it->second;
        for (std::size_t z = 0; z < m; ++z) {
            p_hat[z] += p[z];
            q_hat[z] += q[z];
        }
        if (objective == Objective::gen_brown) {
            for (std::size_t z = 0; z < m; ++z) {
                double *row = mu.data() + z * m;
                for (std::size_t w = 0; w < m; ++w) row[w] += p[z] * q[w];
            }
        } else {
            for (std::size_t z = 0; z < m; ++z) {
                if (q[z] == 0.0) continue;
                if (p[z] == 0.0)
                    throw InfiniteLossError("cross-entropy term is infinite");
                cross += q[z] * std::log2(p[z]);
            }
        }
    }
    for (std::size_t z = 0; z < m; ++z) {
        p_hat[z] *= inv_n;
        q_hat[z] *= inv_n;
    }
    if (objective == Objective::variational) return entropy_bits(q_hat) + cross * inv_n;

    double mi = 0.0;
    for (std::size_t z = 0; z < m; ++z) {
        for (std::size_t w = 0; w < m; ++w) {
            const double v = mu[z * m + w] * inv_n;
            if (v == 0.0) continue;
            mi += v * std::log2(v / (p_hat[z] * q_hat[w]));
        }
    }
    return mi;
}

}  // namespace mimax::objectives
