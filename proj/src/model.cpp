#include "mimax/model.hpp"

#include <algorithm>
#include <cmath>

#include "mimax/errors.hpp"
#include "mimax/rng.hpp"

namespace mimax::model {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_word_id(const ModelParams &params, std::int32_t id) {
    if (id < 0 || id >= params.hyper.vocab_size)
        throw ValidationError("word id " + std::to_string(id) + " out of range [0, " +
                              std::to_string(params.hyper.vocab_size) + ")");
}

}  // namespace

void for_each_array(ModelParams &params,
                    const std::function<void(const std::string &, Matrix &)> &fn) {
    fn("word_emb", params.word_emb);
    for (std::size_t j = 0; j < params.ctx.size(); ++j)
        fn("ctx_" + std::to_string(j), params.ctx[j]);
    fn("char_emb", params.char_emb);
    fn("lstm_f_w", params.lstm_f.w);
    fn("lstm_f_u", params.lstm_f.u);
    fn("lstm_f_b", params.lstm_f.b);
    fn("lstm_b_w", params.lstm_b.w);
    fn("lstm_b_u", params.lstm_b.u);
    fn("lstm_b_b", params.lstm_b.b);
    fn("out_char", params.out_char);
    fn("out_word", params.out_word);
}

void for_each_array(const ModelParams &params,
                    const std::function<void(const std::string &, const Matrix &)> &fn) {
    for_each_array(const_cast<ModelParams &>(params),
                   [&](const std::string &name, Matrix &m) { fn(name, m); });
}

bool is_q_exclusive(const std::string &name) {
    return name == "char_emb" || name == "out_char" || name == "out_word" ||
           name.rfind("lstm_", 0) == 0;
}

GradientSet zeros_like(const ModelParams &params) {
    GradientSet grads = params;
    for_each_array(grads, [](const std::string &, Matrix &m) { m.fill(0.0); });
    return grads;
}

void axpy(GradientSet &dst, double alpha, const GradientSet &src) {
    std::vector<const Matrix *> from;
    for_each_array(src, [&](const std::string &, const Matrix &m) { from.push_back(&m); });
    std::size_t i = 0;
    for_each_array(dst, [&](const std::string &, Matrix &m) {
        const Matrix &s = *from[i++];
        for (std::size_t k = 0; k < m.a.size(); ++k) m.a[k] += alpha * s.a[k];
    });
}

void scale(GradientSet &grads, double alpha) {
    for_each_array(grads, [&](const std::string &, Matrix &m) {
        for (double &v : m.a) v *= alpha;
    });
}

double l2_norm(const GradientSet &grads, bool q_only) {
    double sq = 0.0;
    for_each_array(grads, [&](const std::string &name, const Matrix &m) {
        if (q_only && !is_q_exclusive(name)) return;
        sq += l2_norm_sq(m);
    });
    return std::sqrt(sq);
}

double max_abs_entry(const GradientSet &grads, bool q_only) {
    double best = 0.0;
    for_each_array(grads, [&](const std::string &name, const Matrix &m) {
        if (q_only && !is_q_exclusive(name)) return;
        best = std::max(best, max_abs(m));
    });
    return best;
}

bool same_values(const ModelParams &a, const ModelParams &b) {
    std::vector<const Matrix *> lhs, rhs;
    for_each_array(a, [&](const std::string &, const Matrix &m) { lhs.push_back(&m); });
    for_each_array(b, [&](const std::string &, const Matrix &m) { rhs.push_back(&m); });
    if (lhs.size() != rhs.size()) return false;
    for (std::size_t i = 0; i < lhs.size(); ++i)
        if (!(*lhs[i] == *rhs[i])) return false;
    return true;
}

ModelParams init_params(const Hyper &hyper, std::uint64_t seed) {
    if (hyper.dim < 2 || hyper.dim % 2 != 0)
        throw ValidationError("embedding dimension d must be even and >= 2");
    if (hyper.labels < 2) throw ValidationError("label count m must be >= 2");
    if (hyper.window < 1) throw ValidationError("context width H must be >= 1");
    if (hyper.vocab_size < 1 || hyper.char_count < 1)
        throw ValidationError("vocabulary and character inventory must be nonempty");

    const std::size_t d = static_cast<std::size_t>(hyper.dim);
    const std::size_t h = d / 2;
    const std::size_t m = static_cast<std::size_t>(hyper.labels);

    ModelParams params;
    params.hyper = hyper;
    params.word_emb = Matrix(static_cast<std::size_t>(hyper.vocab_size), d);
    params.ctx.assign(2 * static_cast<std::size_t>(hyper.window), Matrix(m, d));
    params.char_emb = Matrix(static_cast<std::size_t>(hyper.char_count), h);
    for (LstmParams *lstm : {&params.lstm_f, &params.lstm_b}) {
        lstm->w = Matrix(4 * h, h);
        lstm->u = Matrix(4 * h, h);
        lstm->b = Matrix(4 * h, 1);
    }
    params.out_char = Matrix(m, d);
    params.out_word = Matrix(m, d);

    Rng rng(seed);
    auto fill_uniform = [&](Matrix &mat) {
        for (double &v : mat.a) v = uniform_in(rng, -0.1, 0.1);
    };
    fill_uniform(params.word_emb);
    for (Matrix &w : params.ctx) fill_uniform(w);
    fill_uniform(params.char_emb);
    for (LstmParams *lstm : {&params.lstm_f, &params.lstm_b}) {
        fill_uniform(lstm->w);
        fill_uniform(lstm->u);
        for (std::size_t i = h; i < 2 * h; ++i) lstm->b.a[i] = 1.0;  // forget gates
    }
    fill_uniform(params.out_char);
    fill_uniform(params.out_word);
    return params;
}

std::vector<double> softmax(const std::vector<double> &logits) {
    double top = logits[0];
    for (double v : logits) top = std::max(top, v);
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - top);
        sum += probs[i];
    }
    for (double &v : probs) v /= sum;
    return probs;
}

std::vector<double> softmax_vjp(const std::vector<double> &probs,
                                const std::vector<double> &dprobs) {
    double dot = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * dprobs[i];
    std::vector<double> dlogits(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) dlogits[i] = probs[i] * (dprobs[i] - dot);
    return dlogits;
}

std::vector<double> context_logits(const ModelParams &params,
                                   const std::vector<std::int32_t> &context) {
    if (context.size() != params.ctx.size())
        throw ValidationError("context has " + std::to_string(context.size()) +
                              " ids, expected " + std::to_string(params.ctx.size()));
    std::vector<double> logits(static_cast<std::size_t>(params.hyper.labels), 0.0);
    for (std::size_t j = 0; j < context.size(); ++j) {
        check_word_id(params, context[j]);
        matvec_acc(params.ctx[j], params.word_emb.row(static_cast<std::size_t>(context[j])),
                   logits.data());
    }
    return logits;
}

std::vector<double> context_forward(const ModelParams &params,
                                    const std::vector<std::int32_t> &context) {
    return softmax(context_logits(params, context));
}

void context_backward(const ModelParams &params, const std::vector<std::int32_t> &context,
                      const std::vector<double> &dlogits, GradientSet &grads) {
    for (std::size_t j = 0; j < context.size(); ++j) {
        const auto row = static_cast<std::size_t>(context[j]);
        outer_acc(grads.ctx[j], dlogits.data(), params.word_emb.row(row));
        matvec_t_acc(params.ctx[j], dlogits.data(), grads.word_emb.row(row));
    }
}

namespace {

LstmTape lstm_forward(const ModelParams &params, const LstmParams &lstm,
                      const std::vector<std::int32_t> &inputs) {
    const std::size_t h = static_cast<std::size_t>(params.half());
    const std::size_t steps = inputs.size();
    LstmTape tape;
    tape.inputs = inputs;
    tape.gi = Matrix(steps, h);
    tape.gf = Matrix(steps, h);
    tape.go = Matrix(steps, h);
    tape.gg = Matrix(steps, h);
    tape.cell = Matrix(steps, h);
    tape.tanh_cell = Matrix(steps, h);
    tape.hidden = Matrix(steps, h);

    std::vector<double> act(4 * h);
    for (std::size_t t = 0; t < steps; ++t) {
        std::copy(lstm.b.a.begin(), lstm.b.a.end(), act.begin());
        matvec_acc(lstm.w, params.char_emb.row(static_cast<std::size_t>(inputs[t])), act.data());
        if (t > 0) matvec_acc(lstm.u, tape.hidden.row(t - 1), act.data());
        for (std::size_t k = 0; k < h; ++k) {
            const double i = sigmoid(act[k]);
            const double f = sigmoid(act[h + k]);
            const double o = sigmoid(act[2 * h + k]);
            const double g = std::tanh(act[3 * h + k]);
            const double c_prev = t > 0 ? tape.cell(t - 1, k) : 0.0;
            const double c = f * c_prev + i * g;
            const double tc = std::tanh(c);
            tape.gi(t, k) = i;
            tape.gf(t, k) = f;
            tape.go(t, k) = o;
            tape.gg(t, k) = g;
            tape.cell(t, k) = c;
            tape.tanh_cell(t, k) = tc;
            tape.hidden(t, k) = o * tc;
        }
    }
    return tape;
}

// Backpropagate a cotangent on the final hidden state through the tape.
void lstm_backward(const ModelParams &params, const LstmParams &lstm, const LstmTape &tape,
                   const std::vector<double> &dh_final, LstmParams &lstm_grads,
                   Matrix &char_emb_grads) {
    const std::size_t h = static_cast<std::size_t>(params.half());
    const std::size_t steps = tape.inputs.size();
    std::vector<double> dh(dh_final);
    std::vector<double> dc(h, 0.0);
    std::vector<double> da(4 * h);
    std::vector<double> dh_prev(h);
    for (std::size_t t = steps; t-- > 0;) {
        for (std::size_t k = 0; k < h; ++k) {
            const double i = tape.gi(t, k);
            const double f = tape.gf(t, k);
            const double o = tape.go(t, k);
            const double g = tape.gg(t, k);
            const double tc = tape.tanh_cell(t, k);
            const double c_prev = t > 0 ? tape.cell(t - 1, k) : 0.0;
            const double d_o = dh[k] * tc;
            const double d_c = dc[k] + dh[k] * o * (1.0 - tc * tc);
            const double d_i = d_c * g;
            const double d_f = d_c * c_prev;
            const double d_g = d_c * i;
            da[k] = d_i * i * (1.0 - i);
            da[h + k] = d_f * f * (1.0 - f);
            da[2 * h + k] = d_o * o * (1.0 - o);
            da[3 * h + k] = d_g * (1.0 - g * g);
            dc[k] = d_c * f;
        }
        const auto row = static_cast<std::size_t>(tape.inputs[t]);
        outer_acc(lstm_grads.w, da.data(), params.char_emb.row(row));
        matvec_t_acc(lstm.w, da.data(), char_emb_grads.row(row));
        for (std::size_t k = 0; k < 4 * h; ++k) lstm_grads.b.a[k] += da[k];
        if (t > 0) {
            outer_acc(lstm_grads.u, da.data(), tape.hidden.row(t - 1));
            std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
            matvec_t_acc(lstm.u, da.data(), dh_prev.data());
            dh = dh_prev;
        }
    }
}

}  // namespace

WordTape word_forward_tape(const ModelParams &params, std::int32_t word,
                           const corpus::Vocab &vocab) {
    check_word_id(params, word);
    const std::vector<std::int32_t> &chars = vocab.char_seqs[static_cast<std::size_t>(word)];
    if (chars.empty())
        throw ValidationError("word id " + std::to_string(word) + " has no characters");

    WordTape tape;
    tape.word = word;
    tape.fwd = lstm_forward(params, params.lstm_f, chars);
    std::vector<std::int32_t> reversed(chars.rbegin(), chars.rend());
    tape.bwd = lstm_forward(params, params.lstm_b, reversed);

    const std::size_t h = static_cast<std::size_t>(params.half());
    const std::size_t last = chars.size() - 1;
    tape.encoding.resize(2 * h);
    for (std::size_t k = 0; k < h; ++k) {
        tape.encoding[k] = tape.fwd.hidden(last, k);
        tape.encoding[h + k] = tape.bwd.hidden(last, k);
    }

    tape.logits.assign(static_cast<std::size_t>(params.hyper.labels), 0.0);
    matvec_acc(params.out_char, tape.encoding.data(), tape.logits.data());
    matvec_acc(params.out_word, params.word_emb.row(static_cast<std::size_t>(word)),
               tape.logits.data());
    tape.probs = softmax(tape.logits);
    return tape;
}

void word_backward(const ModelParams &params, const WordTape &tape,
                   const std::vector<double> &dlogits, GradientSet &grads) {
    const std::size_t h = static_cast<std::size_t>(params.half());
    const auto row = static_cast<std::size_t>(tape.word);

    outer_acc(grads.out_char, dlogits.data(), tape.encoding.data());
    outer_acc(grads.out_word, dlogits.data(), params.word_emb.row(row));
    matvec_t_acc(params.out_word, dlogits.data(), grads.word_emb.row(row));

    std::vector<double> dencoding(2 * h, 0.0);
    matvec_t_acc(params.out_char, dlogits.data(), dencoding.data());
    const std::vector<double> dh_f(dencoding.begin(), dencoding.begin() + h);
    const std::vector<double> dh_b(dencoding.begin() + h, dencoding.end());
    lstm_backward(params, params.lstm_f, tape.fwd, dh_f, grads.lstm_f, grads.char_emb);
    lstm_backward(params, params.lstm_b, tape.bwd, dh_b, grads.lstm_b, grads.char_emb);
}

std::vector<double> char_encode(const ModelParams &params, std::int32_t word,
                                const corpus::Vocab &vocab) {
    return word_forward_tape(params, word, vocab).encoding;
}

std::vector<double> word_forward(const ModelParams &params, std::int32_t word,
                                 const corpus::Vocab &vocab) {
    return word_forward_tape(params, word, vocab).probs;
}

int induce_label(const ModelParams &params, std::int32_t word, const corpus::Vocab &vocab) {
    const std::vector<double> probs = word_forward(params, word, vocab);
    std::size_t best = 0;
    for (std::size_t z = 1; z < probs.size(); ++z)
        if (probs[z] > probs[best]) best = z;
    return static_cast<int>(best);
}

}  // namespace mimax::model
