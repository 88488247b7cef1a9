// Exact discrete information-theoretic primitives. All quantities are in
// bits (log base 2) and all sums use the 0 log 0 = 0 convention, so tables
// with empty cells are fine.

#ifndef MIMAX_INFOTHEORY_HPP
#define MIMAX_INFOTHEORY_HPP

#include <cstddef>
#include <vector>

namespace mimax::infotheory {

// Probability vector: entries >= 0, summing to 1 within 1e-9.
struct Distribution {
    std::vector<double> probs;
};

// Joint probability table, row-major: entries >= 0, grand total 1 within 1e-9.
struct JointTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> probs;

    double operator()(std::size_t i, std::size_t j) const { return probs[i * cols + j]; }
    double &operator()(std::size_t i, std::size_t j) { return probs[i * cols + j]; }
};

// Throw ValidationError unless the argument is a valid distribution/table.
void validate(const Distribution &p);
void validate(const JointTable &j);

JointTable transpose(const JointTable &j);
Distribution row_marginal(const JointTable &j);
Distribution col_marginal(const JointTable &j);

// H(p) = -sum p log2 p  >= 0
double entropy(const Distribution &p);

// H(p,q) = -sum p log2 q; throws InfiniteLossError if q(x)=0 where p(x)>0.
double cross_entropy(const Distribution &p, const Distribution &q);

// D(p||q) = H(p,q) - H(p) >= 0
double kl_divergence(const Distribution &p, const Distribution &q);

// I(X;Y) = sum_xy p(x,y) log2( p(x,y) / (p(x)p(y)) ) with X the row
// variable and Y the column variable.
double mutual_information(const JointTable &j);

// H(X|Y) = sum_y p(y) H(X|Y=y), conditioning on the column variable.
double conditional_entropy(const JointTable &j);

}  // namespace mimax::infotheory

#endif  // MIMAX_INFOTHEORY_HPP
