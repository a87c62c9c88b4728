#include <gtest/gtest.h>

#include <cmath>

#include "slab/errors.hpp"
#include "slab/free_group.hpp"
#include "slab/tolerances.hpp"

using namespace slab;

namespace {

const Group F2 = Group::free2();
const Group Z = Group::integers();

Word w(const std::string& s) { return parse_word(F2, s); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Words, Reduction) {
    EXPECT_TRUE(mul(w("a"), w("A")).is_identity());
    EXPECT_EQ(length(w("a") * w("b") * w("A")), 3u);
    EXPECT_EQ(inv(w("ab")), w("BA"));
    EXPECT_EQ(format_word(F2, w("aAb")), "b");
    EXPECT_EQ(format_word(F2, Word{}), "e");
    EXPECT_EQ(format_word(Z, Word::integer(-3)), "-3");
    EXPECT_EQ(parse_word(Z, "4"), Word::integer(4));
    EXPECT_EQ(Word::integer(2) * Word::integer(-5), Word::integer(-3));
    EXPECT_THROW(parse_word(F2, "ac"), DomainError);
}

TEST(Words, GroupAxioms) {
    CounterRng rng(1);
    auto random_word = [&](int len) {
        std::string s;
        for (int i = 0; i < len; ++i) s += static_cast<char>(rng.below(4));
        return Word::from_letters(s);
    };
    for (int i = 0; i < 200; ++i) {
        const Word x = random_word(6), y = random_word(6), z = random_word(6);
        EXPECT_EQ((x * y) * z, x * (y * z));
        EXPECT_TRUE((x * x.inverse()).is_identity());
        EXPECT_LE(length(x * y), length(x) + length(y));
    }
}

TEST(Balls, SmallSizes) {
    ASSERT_EQ(ball(F2, 0).size(), 1u);
    EXPECT_TRUE(ball(F2, 0)[0].is_identity());
    EXPECT_EQ(ball(F2, 1).size(), 5u);
    EXPECT_EQ(ball(F2, 2).size(), 17u);
    const auto z3 = ball(Z, 3);
    ASSERT_EQ(z3.size(), 7u);
    std::set<long long> values;
    for (const auto& x : z3) values.insert(x.exponent_sum());
    EXPECT_EQ(values, (std::set<long long>{-3, -2, -1, 0, 1, 2, 3}));
}

TEST(Balls, CountsMatchClosedForm) {
    std::uint64_t pow3 = 1;
    for (int n = 1; n <= 12; ++n) {
        EXPECT_EQ(F2.sphere_size(n), 4 * pow3);
        pow3 *= 3;
        EXPECT_EQ(F2.ball_size(n), 2 * pow3 - 1);
    }
    for (int n = 1; n <= 8; ++n) EXPECT_EQ(sphere(F2, n).size(), F2.sphere_size(n));
    EXPECT_EQ(Group::free(3).sphere_size(2), 6u * 5u);
}

TEST(Balls, IndexIsCanonicalOrder) {
    const auto b = ball(F2, 5);
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_EQ(ball_index(F2, b[i]), i);
        EXPECT_EQ(word_at(F2, i), b[i]);
        if (i > 0) EXPECT_LT(b[i - 1], b[i]);
    }
}

TEST(Convolution, Deltas) {
    const auto d = [](const Word& x) { return GroupFunction::delta(F2, x); };
    EXPECT_EQ(convolve(d(w("ab")), d(w("Ba"))), d(w("aa")));
    const GroupFunction f = add(d(w("a")), d(w("A")));
    const GroupFunction ff = convolve(f, f);
    EXPECT_EQ(ff(Word{}), Complex(2.0));
    EXPECT_EQ(ff.size(), 3u);
}

TEST(Convolution, GeneratorSumNorm) {
    const GroupFunction f = generator_sum(F2);
    EXPECT_EQ(convolve(involution(f), f).l1_norm(), 16.0);
}

TEST(Convolution, InvolutionIsAntiMultiplicative) {
    CounterRng rng(2);
    for (int i = 0; i < 20; ++i) {
        const GroupFunction f = random_sparse_function(F2, 3, 8, rng), g = random_sparse_function(F2, 3, 8, rng);
        const GroupFunction lhs = involution(convolve(f, g));
        const GroupFunction rhs = convolve(involution(g), involution(f));
        ASSERT_EQ(lhs.size(), rhs.size());
        for (const auto& [x, v] : lhs.support()) EXPECT_LE(std::abs(v - rhs(x)), 1e-14);
    }
    EXPECT_EQ(involution(GroupFunction::delta(F2, w("ab"))), GroupFunction::delta(F2, w("BA")));
    const GroupFunction s = add(GroupFunction::delta(F2, w("ab"), 2.0), GroupFunction::delta(F2, w("BA"), 2.0));
    EXPECT_EQ(involution(s), s);
}

TEST(Convolution, Associative) {
    CounterRng rng(3);
    const GroupFunction f = random_sparse_function(F2, 2, 6, rng), g = random_sparse_function(F2, 2, 6, rng),
                        h = random_sparse_function(F2, 2, 6, rng);
    const GroupFunction a = convolve(convolve(f, g), h), b = convolve(f, convolve(g, h));
    for (const auto& [x, v] : a.support()) EXPECT_LE(std::abs(v - b(x)), kTol.convolution_associativity);
}

TEST(Convolution, ParallelIsBitwiseSerial) {
    CounterRng rng(4);
    for (int i = 0; i < 10; ++i) {
        const GroupFunction f = random_sparse_function(F2, 4, 40, rng), g = random_sparse_function(F2, 4, 40, rng);
        EXPECT_EQ(convolve(f, g), convolve_serial(f, g));
    }
}

TEST(Convolution, PowerCap) {
    EXPECT_THROW(convolution_power(generator_sum(F2), 12, 1000), SizeError);
    EXPECT_EQ(convolution_power(generator_sum(F2), 3, 1000).l1_norm(), 64.0);
}

TEST(PhiT, Values) {
    const GroupFunction phi = phi_t(F2, 0.4, 4);
    EXPECT_EQ(phi(Word{}), Complex(1.0));
    EXPECT_NEAR(phi(w("ab")).real(), std::exp(-0.8), 1e-16);
    EXPECT_THROW(phi_t(F2, 0.0, 2), DomainError);
    for (double p : {1.0, 2.0, 3.5}) {
        double closed = 1.0;
        for (int n = 1; n <= 4; ++n) closed += 4.0 * std::pow(3.0, n - 1) * std::exp(-p * 0.4 * n);
        EXPECT_LE(rel(std::pow(phi.lp_norm(SchattenIndex(p)), p), closed), 1e-13) << p;
    }
}

TEST(Threshold, Examples) {
    const ThresholdProbe c = lp_threshold_probe(F2, 1.0, 2.0 * std::log(3.0), 8);
    EXPECT_TRUE(c.convergent);
    EXPECT_NEAR(c.ratio, 1.0 / 3.0, 1e-15);
    const ThresholdProbe d = lp_threshold_probe(F2, 1.0, 0.5 * std::log(3.0), 8);
    EXPECT_FALSE(d.convergent);
    EXPECT_NEAR(d.ratio, std::sqrt(3.0), 1e-14);
    EXPECT_TRUE(lp_threshold_probe(Z, 3.0, 0.01, 8).convergent);
    EXPECT_NEAR(c.critical_t, std::log(3.0), 1e-15);
}

TEST(Threshold, MeasuredRatiosMatch) {
    for (double factor : {0.8, 1.2}) {
        const double t = factor * std::log(3.0) / 4.0;
        const ThresholdProbe pr = lp_threshold_probe(F2, 4.0, t, 10);
        EXPECT_EQ(pr.convergent, factor > 1.0);
        for (double r : pr.increment_ratios) EXPECT_LE(rel(r, 3.0 * std::exp(-4.0 * t)), kTol.threshold_ratio);
        for (std::size_t i = 1; i < pr.partial_sums.size(); ++i) EXPECT_GT(pr.partial_sums[i], pr.partial_sums[i - 1]);
    }
    EXPECT_THROW(lp_threshold_probe(F2, 0.5, 1.0, 4), DomainError);
    EXPECT_THROW(lp_threshold_probe(F2, 2.0, -1.0, 4), DomainError);
}

TEST(BallShift, ParallelMatchesSerialAndAdjoint) {
    CounterRng rng(5);
    const GroupFunction f = random_sparse_function(F2, 2, 6, rng);
    const BallShiftOperator op(f, 5);
    Vector v(op.domain_size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
    Vector a, b;
    op.apply(v, a, true);
    op.apply_serial(v, b);
    EXPECT_EQ(a, b);
    Vector u(op.range_size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.complex_normal();
    Vector au;
    op.apply_adjoint(u, au);
    EXPECT_LE(std::abs(u.dot(a) - au.dot(v)), 1e-10 * std::abs(u.dot(a)));
}

TEST(ReducedNorm, UnitaryAndKesten) {
    EXPECT_NEAR(reduced_norm_estimate(GroupFunction::delta(F2, w("ab")), 4).value, 1.0, 1e-12);
    const GroupFunction f = generator_sum(F2);
    double prev = 0.0;
    for (int r : {2, 4, 6, 8}) {
        const double v = reduced_norm_estimate(f, r).value;
        EXPECT_GT(v, prev - kTol.reduced_norm_monotone);
        EXPECT_LT(v, 2.0 * std::sqrt(3.0));
        prev = v;
    }
    EXPECT_NEAR(prev * prev, 11.1798, 1e-3);
    EXPECT_THROW(reduced_norm_estimate(phi_t(F2, 1.0, 3), 2), DomainError);
}

TEST(ReducedNorm, IntegersTwoPoint) {
    GroupFunction f(Z);
    f.add(Word::integer(1), 1.0);
    f.add(Word::integer(-1), 1.0);
    EXPECT_NEAR(reduced_norm_estimate(f, 256).value, 2.0, 1e-3);
}

TEST(ReducedNorm, SerialMatchesParallel) {
    CounterRng rng(6);
    const GroupFunction f = random_sparse_function(F2, 2, 5, rng);
    const auto a = reduced_norm_estimate(f, 5, 200, 1e-10, true);
    const auto b = reduced_norm_estimate(f, 5, 200, 1e-10, false);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.iterations, b.iterations);
}
