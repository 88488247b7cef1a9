#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mimax/errors.hpp"
#include "mimax/infotheory.hpp"
#include "mimax/objectives.hpp"
#include "test_util.hpp"

using namespace mimax;
using namespace mimax::objectives;

namespace {

// Hand-built forward with given rows.
BatchForward forward_from_rows(const std::vector<std::vector<double>> &p,
                               const std::vector<std::vector<double>> &q) {
    BatchForward fwd;
    const std::size_t n = p.size();
    const std::size_t m = p[0].size();
    fwd.p_rows = Matrix(n, m);
    fwd.q_rows = Matrix(n, m);
    fwd.p_hat.assign(m, 0.0);
    fwd.q_hat.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t z = 0; z < m; ++z) {
            fwd.p_rows(i, z) = p[i][z];
            fwd.q_rows(i, z) = q[i][z];
            fwd.p_hat[z] += p[i][z] / static_cast<double>(n);
            fwd.q_hat[z] += q[i][z] / static_cast<double>(n);
        }
    return fwd;
}

corpus::Batch whole_batch(const std::vector<corpus::ContextWordPair> &pairs) {
    corpus::Batch batch;
    batch.pairs = pairs;
    return batch;
}

}  // namespace

TEST_CASE("batch forward rows and means") {
    const testutil::TinySetup setup = testutil::tiny_setup(1);
    corpus::Batch batch = whole_batch(setup.pairs);
    const BatchForward fwd = batch_forward(setup.params, batch, setup.vocab);

    // Means recomputed independently.
    const std::size_t n = fwd.p_rows.rows;
    const std::size_t m = fwd.p_rows.cols;
    for (std::size_t z = 0; z < m; ++z) {
        double ps = 0.0, qs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ps += fwd.p_rows(i, z);
            qs += fwd.q_rows(i, z);
        }
        CHECK(fwd.p_hat[z] == doctest::Approx(ps / static_cast<double>(n)).epsilon(1e-12));
        CHECK(fwd.q_hat[z] == doctest::Approx(qs / static_cast<double>(n)).epsilon(1e-12));
    }
    double p_hat_sum = 0.0, q_hat_sum = 0.0;
    for (std::size_t z = 0; z < m; ++z) {
        p_hat_sum += fwd.p_hat[z];
        q_hat_sum += fwd.q_hat[z];
    }
    CHECK(p_hat_sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(q_hat_sum == doctest::Approx(1.0).epsilon(1e-9));

    // A batch of identical pairs has identical rows equal to the means.
    corpus::Batch same;
    same.pairs.assign(4, setup.pairs[0]);
    const BatchForward dup = batch_forward(setup.params, same, setup.vocab);
    for (std::size_t z = 0; z < m; ++z) {
        CHECK(dup.p_rows(0, z) == dup.p_rows(3, z));
        CHECK(dup.p_hat[z] == doctest::Approx(dup.p_rows(0, z)).epsilon(1e-12));
    }
}

TEST_CASE("zero-parameter model gives uniform rows") {
    testutil::TinySetup setup = testutil::tiny_setup(2);
    model::for_each_array(setup.params, [](const std::string &, Matrix &m) { m.fill(0.0); });
    const BatchForward fwd =
        batch_forward(setup.params, whole_batch(setup.pairs), setup.vocab);
    for (std::size_t i = 0; i < fwd.p_rows.rows; ++i)
        for (std::size_t z = 0; z < fwd.p_rows.cols; ++z) {
            CHECK(fwd.p_rows(i, z) == doctest::Approx(1.0 / 3).epsilon(1e-12));
            CHECK(fwd.q_rows(i, z) == doctest::Approx(1.0 / 3).epsilon(1e-12));
        }
    CHECK(variational_objective(fwd) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(gen_brown_objective(fwd) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("variational objective closed forms") {
    // Matching point masses: H(Z) = 0 and the cross term is 0.
    const std::vector<std::vector<double>> point = {{0.0, 1.0}, {0.0, 1.0}};
    CHECK(variational_objective(forward_from_rows(point, point)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    // Half the mass on each label, P matching Q rowwise: 1 bit.
    const std::vector<std::vector<double>> split = {{1.0, 0.0}, {0.0, 1.0}};
    CHECK(variational_objective(forward_from_rows(split, split)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gen brown objective closed forms and the infotheory bridge") {
    // Single sample: the mean joint is the product of its own marginals.
    const testutil::TinySetup setup = testutil::tiny_setup(3);
    corpus::Batch one;
    one.pairs = {setup.pairs[0]};
    const BatchForward single = batch_forward(setup.params, one, setup.vocab);
    CHECK(gen_brown_objective(single) == doctest::Approx(0.0).epsilon(1e-12));

    // Random batch: the value is the mutual information of the mean joint.
    const BatchForward fwd =
        batch_forward(setup.params, whole_batch(setup.pairs), setup.vocab);
    infotheory::JointTable joint;
    joint.rows = fwd.p_rows.cols;
    joint.cols = fwd.p_rows.cols;
    joint.probs = mean_joint(fwd);
    CHECK(gen_brown_objective(fwd) ==
          doctest::Approx(infotheory::mutual_information(joint)).epsilon(1e-10));
}

TEST_CASE("objectives are invariant to label permutation") {
    const testutil::TinySetup setup = testutil::tiny_setup(4, 20, 60, 4, 6);
    const BatchForward fwd =
        batch_forward(setup.params, whole_batch(setup.pairs), setup.vocab);
    const double var = variational_objective(fwd);
    const double mi = gen_brown_objective(fwd);

    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    BatchForward permuted = fwd;
    for (std::size_t i = 0; i < fwd.p_rows.rows; ++i)
        for (std::size_t z = 0; z < 4; ++z) {
            permuted.p_rows(i, perm[z]) = fwd.p_rows(i, z);
            permuted.q_rows(i, perm[z]) = fwd.q_rows(i, z);
        }
    for (std::size_t z = 0; z < 4; ++z) {
        permuted.p_hat[perm[z]] = fwd.p_hat[z];
        permuted.q_hat[perm[z]] = fwd.q_hat[z];
    }
    CHECK(variational_objective(permuted) == doctest::Approx(var).epsilon(1e-12));
    CHECK(gen_brown_objective(permuted) == doctest::Approx(mi).epsilon(1e-12));
}

TEST_CASE("objectives are bounded by log2 m") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const testutil::TinySetup setup = testutil::tiny_setup(rng(), 15, 40, 4, 6);
        const BatchForward fwd =
            batch_forward(setup.params, whole_batch(setup.pairs), setup.vocab);
        const double bound = std::log2(4.0) + 1e-12;
        CHECK(variational_objective(fwd) <= bound);
        CHECK(gen_brown_objective(fwd) <= bound);
    }
}

TEST_CASE("gradient matches the objective value") {
    const testutil::TinySetup setup = testutil::tiny_setup(6);
    const corpus::Batch batch = whole_batch(setup.pairs);
    for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
        const auto [value, grads] =
            objective_gradient(setup.params, batch, setup.vocab, objective);
        (void)grads;
        CHECK(value ==
              doctest::Approx(testutil::objective_value(setup.params, batch, setup.vocab,
                                                        objective))
                  .epsilon(1e-12));
    }
}

TEST_CASE("finite differences confirm the gradients") {
    Rng rng(7);
    const testutil::TinySetup setup = testutil::tiny_setup(7);
    corpus::Batch batch;
    batch.pairs.assign(setup.pairs.begin(), setup.pairs.begin() + 24);
    const std::size_t total = testutil::param_count(setup.params);

    for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
        const auto [value, grads] =
            objective_gradient(setup.params, batch, setup.vocab, objective);
        (void)value;
        std::vector<const Matrix *> arrays;
        model::for_each_array(grads, [&](const std::string &, const Matrix &m) {
            arrays.push_back(&m);
        });
        for (int probe = 0; probe < 25; ++probe) {
            const std::size_t index = uniform_index(rng, total);
            double analytic = 0.0;
            {
                std::size_t rest = index;
                for (const Matrix *m : arrays) {
                    if (rest < m->size()) {
                        analytic = m->a[rest];
                        break;
                    }
                    rest -= m->size();
                }
            }
            const double numeric =
                testutil::finite_difference(setup.params, batch, setup.vocab, objective, index);
            const double err = std::fabs(analytic - numeric);
            if (std::fabs(numeric) < 1e-7)
                CHECK(err < 1e-7);
            else
                CHECK(err / std::fabs(numeric) < 1e-4);
        }
    }
}

TEST_CASE("structural zero: entropy term has no p dependence") {
    // For the variational objective, parameters reachable only through P
    // get gradients only from the cross-entropy term. With Q and q_hat
    // uniform (all q parameters zero), the entropy term is at a critical
    // point, so gradients through P must equal those of the cross term.
    testutil::TinySetup setup = testutil::tiny_setup(8);
    const corpus::Batch batch = whole_batch(setup.pairs);
    const auto [value, grads] =
        objective_gradient(setup.params, batch, setup.vocab, Objective::variational);
    (void)value;
    // The context matrices are p-exclusive: their gradient must match a
    // finite difference of the cross term alone. Since the entropy term
    // has no P dependence at all, this is already covered by the full
    // finite-difference check; here we assert the q-side entry pattern:
    // perturbing a ctx weight leaves q_hat untouched.
    model::ModelParams work = setup.params;
    work.ctx[0](0, 0) += 0.37;
    const BatchForward before = batch_forward(setup.params, batch, setup.vocab);
    const BatchForward after = batch_forward(work, batch, setup.vocab);
    CHECK(before.q_hat == after.q_hat);
    (void)grads;
}

TEST_CASE("duplicating every pair leaves value and gradient unchanged") {
    const testutil::TinySetup setup = testutil::tiny_setup(9);
    corpus::Batch batch;
    batch.pairs.assign(setup.pairs.begin(), setup.pairs.begin() + 10);
    corpus::Batch doubled;
    doubled.pairs = batch.pairs;
    doubled.pairs.insert(doubled.pairs.end(), batch.pairs.begin(), batch.pairs.end());

    for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
        const auto [v1, g1] = objective_gradient(setup.params, batch, setup.vocab, objective);
        const auto [v2, g2] = objective_gradient(setup.params, doubled, setup.vocab, objective);
        CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
        model::GradientSet diff = g1;
        model::axpy(diff, -1.0, g2);
        CHECK(model::max_abs_entry(diff) < 1e-12);
    }
}

TEST_CASE("corpus objective equals the whole-dataset batch objective") {
    const testutil::TinySetup setup = testutil::tiny_setup(10);
    const corpus::Batch batch = whole_batch(setup.pairs);
    for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
        const double batch_value =
            testutil::objective_value(setup.params, batch, setup.vocab, objective);
        const double corpus_value =
            corpus_objective(setup.params, setup.pairs, setup.vocab, objective);
        CHECK(batch_value == doctest::Approx(corpus_value).epsilon(1e-12));
    }
    // Lower bound structure: J_var <= H(q_hat) <= log2 m.
    const BatchForward fwd = batch_forward(setup.params, batch, setup.vocab);
    double h = 0.0;
    for (double v : fwd.q_hat) h -= v > 0 ? v * std::log2(v) : 0.0;
    CHECK(variational_objective(fwd) <= h + 1e-12);
    CHECK(h <= std::log2(3.0) + 1e-12);
}

TEST_CASE("empty batch is an error") {
    const testutil::TinySetup setup = testutil::tiny_setup(11);
    corpus::Batch empty;
    CHECK_THROWS_AS(batch_forward(setup.params, empty, setup.vocab), ValidationError);
    CHECK_THROWS_AS(objective_gradient(setup.params, empty, setup.vocab, Objective::variational),
                    ValidationError);
}
