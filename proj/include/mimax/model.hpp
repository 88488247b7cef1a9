// The two classifiers. The context classifier p(.|x) applies one linear
// map per context position to shared word embeddings and a softmax. The
// word classifier q(.|y) runs two character-level LSTMs (forward and
// backward) plus the word embedding through output matrices and a softmax.
//
// Besides the forward passes, this module exposes the matching backward
// (vector-Jacobian) passes used by the objectives and the bias audit.

#ifndef MIMAX_MODEL_HPP
#define MIMAX_MODEL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mimax/corpus.hpp"
#include "mimax/matrix.hpp"

namespace mimax::model {

struct Hyper {
    int dim = 0;         // word embedding width d (even; chars use d/2)
    int window = 0;      // context width H
    int labels = 0;      // number of labels m
    int vocab_size = 0;  // |V| including reserved ids
    int char_count = 0;  // |C| including the unknown-character slot
};

// One single-layer LSTM. Input and state width are both d/2. Gate rows of
// w, u, b are packed [input; forget; output; candidate].
struct LstmParams {
    Matrix w;  // 4h x h, applied to the input
    Matrix u;  // 4h x h, applied to the previous hidden state
    Matrix b;  // 4h x 1
};

struct ModelParams {
    Hyper hyper;
    Matrix word_emb;          // |V| x d, shared between p and q
    std::vector<Matrix> ctx;  // 2H matrices, m x d
    Matrix char_emb;          // |C| x d/2
    LstmParams lstm_f;
    LstmParams lstm_b;
    Matrix out_char;  // m x d, applied to [f_T; b_T]
    Matrix out_word;  // m x d, applied to the word embedding

    int half() const { return hyper.dim / 2; }
};

// Per-parameter gradient accumulator, shaped exactly like ModelParams.
using GradientSet = ModelParams;

// Visit every parameter array with a stable name (serialization order).
void for_each_array(ModelParams &params,
                    const std::function<void(const std::string &, Matrix &)> &fn);
void for_each_array(const ModelParams &params,
                    const std::function<void(const std::string &, const Matrix &)> &fn);

// Parameters of the q classifier excluding the shared word embeddings:
// the bias audit works in the theorem's disjoint-parameter setting.
bool is_q_exclusive(const std::string &name);

GradientSet zeros_like(const ModelParams &params);
void axpy(GradientSet &dst, double alpha, const GradientSet &src);
void scale(GradientSet &grads, double alpha);
double l2_norm(const GradientSet &grads, bool q_only = false);
double max_abs_entry(const GradientSet &grads, bool q_only = false);
bool same_values(const ModelParams &a, const ModelParams &b);

// All matrices and embeddings i.i.d. uniform on [-0.1, 0.1]; LSTM biases
// zero except the forget gates, which start at 1. Deterministic per seed.
ModelParams init_params(const Hyper &hyper, std::uint64_t seed);

// Numerically stabilized softmax (max subtraction).
std::vector<double> softmax(const std::vector<double> &logits);
// dlogits from dprobs at a softmax output.
std::vector<double> softmax_vjp(const std::vector<double> &probs,
                                const std::vector<double> &dprobs);

// p(.|x): softmax over sum_j ctx[j] * word_emb[x_j].
std::vector<double> context_logits(const ModelParams &params,
                                   const std::vector<std::int32_t> &context);
std::vector<double> context_forward(const ModelParams &params,
                                    const std::vector<std::int32_t> &context);
// Accumulate gradients of the context logits against cotangent dlogits.
void context_backward(const ModelParams &params, const std::vector<std::int32_t> &context,
                      const std::vector<double> &dlogits, GradientSet &grads);

// Cached intermediate state of one LSTM run, for the backward pass.
struct LstmTape {
    std::vector<std::int32_t> inputs;        // char ids in processing order
    Matrix gi, gf, go, gg, cell, tanh_cell;  // T x h each
    Matrix hidden;                           // T x h
};

// Forward/backward LSTM pair over a word's characters plus the q logits.
struct WordTape {
    std::int32_t word = 0;
    LstmTape fwd;
    LstmTape bwd;
    std::vector<double> encoding;  // [f_T; b_T], length d
    std::vector<double> logits;    // length m
    std::vector<double> probs;     // length m
};

WordTape word_forward_tape(const ModelParams &params, std::int32_t word,
                           const corpus::Vocab &vocab);
// Accumulate q-logit cotangent dlogits through the word architecture.
void word_backward(const ModelParams &params, const WordTape &tape,
                   const std::vector<double> &dlogits, GradientSet &grads);

// [f_T; b_T] for the word's character sequence.
std::vector<double> char_encode(const ModelParams &params, std::int32_t word,
                                const corpus::Vocab &vocab);
// q(.|y).
std::vector<double> word_forward(const ModelParams &params, std::int32_t word,
                                 const corpus::Vocab &vocab);
// argmax_z q(z|y); ties break toward the lowest label.
int induce_label(const ModelParams &params, std::int32_t word, const corpus::Vocab &vocab);

}  // namespace mimax::model

#endif  // MIMAX_MODEL_HPP
