#include "mimax/infotheory.hpp"

#include <cmath>
#include <string>

#include "mimax/errors.hpp"

namespace mimax::infotheory {

namespace {

constexpr double kSumTolerance = 1e-9;

// x log2 x with the 0 log 0 = 0 convention.
inline double xlog2x(double x) {
    return x > 0.0 ? x * std::log2(x) : 0.0;
}

}  // namespace

void validate(const Distribution &p) {
    if (p.probs.empty()) throw ValidationError("distribution is empty");
    double sum = 0.0;
    for (double v : p.probs) {
        if (v < 0.0 || !std::isfinite(v))
            throw ValidationError("distribution entry " + std::to_string(v) + " is not a probability");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > kSumTolerance)
        throw ValidationError("distribution sums to " + std::to_string(sum) + ", not 1");
}

void validate(const JointTable &j) {
    if (j.rows == 0 || j.cols == 0 || j.probs.size() != j.rows * j.cols)
        throw ValidationError("joint table has inconsistent dimensions");
    double sum = 0.0;
    for (double v : j.probs) {
        if (v < 0.0 || !std::isfinite(v))
            throw ValidationError("joint table entry " + std::to_string(v) + " is not a probability");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > kSumTolerance)
        throw ValidationError("joint table sums to " + std::to_string(sum) + ", not 1");
}

JointTable transpose(const JointTable &j) {
    JointTable t;
    t.rows = j.cols;
    t.cols = j.rows;
    t.probs.assign(j.probs.size(), 0.0);
    for (std::size_t x = 0; x < j.rows; ++x)
        for (std::size_t y = 0; y < j.cols; ++y) t(y, x) = j(x, y);
    return t;
}

Distribution row_marginal(const JointTable &j) {
    Distribution p;
    p.probs.assign(j.rows, 0.0);
    for (std::size_t x = 0; x < j.rows; ++x)
        for (std::size_t y = 0; y < j.cols; ++y) p.probs[x] += j(x, y);
    return p;
}

Distribution col_marginal(const JointTable &j) {
    Distribution p;
    p.probs.assign(j.cols, 0.0);
    for (std::size_t x = 0; x < j.rows; ++x)
        for (std::size_t y = 0; y < j.cols; ++y) p.probs[y] += j(x, y);
    return p;
}

double entropy(const Distribution &p) {
    validate(p);
    double h = 0.0;
    for (double v : p.probs) h -= xlog2x(v);
    return h;
}

double cross_entropy(const Distribution &p, const Distribution &q) {
    validate(p);
    validate(q);
    if (p.probs.size() != q.probs.size())
        throw ValidationError("cross entropy needs equal-length distributions");
    double h = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] == 0.0) continue;
        if (q.probs[i] == 0.0)
            throw InfiniteLossError("cross entropy is infinite: q(" + std::to_string(i) +
                                    ") = 0 but p > 0");
        h -= p.probs[i] * std::log2(q.probs[i]);
    }
    return h;
}

double kl_divergence(const Distribution &p, const Distribution &q) {
    return cross_entropy(p, q) - entropy(p);
}

double mutual_information(const JointTable &j) {
    validate(j);
    const Distribution px = row_marginal(j);
    const Distribution py = col_marginal(j);
    double mi = 0.0;
    for (std::size_t x = 0; x < j.rows; ++x) {
        for (std::size_t y = 0; y < j.cols; ++y) {
            const double v = j(x, y);
            if (v == 0.0) continue;
            mi += v * std::log2(v / (px.probs[x] * py.probs[y]));
        }
    }
    return mi;
}

double conditional_entropy(const JointTable &j) {
    validate(j);
    const Distribution py = col_marginal(j);
    double h = 0.0;
    for (std::size_t x = 0; x < j.rows; ++x) {
        for (std::size_t y = 0; y < j.cols; ++y) {
            const double v = j(x, y);
            if (v == 0.0) continue;
            h -= v * std::log2(v / py.probs[y]);
        }
    }
    return h;
}

}  // namespace mimax::infotheory
