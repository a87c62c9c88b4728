#include <gtest/gtest.h>

#include <cmath>

#include "slab/errors.hpp"
#include "slab/spectral_lab.hpp"
#include "slab/tolerances.hpp"

using namespace slab;

namespace {

const Group F2 = Group::free2();
const Group Z = Group::integers();

GroupFunction z_function(std::initializer_list<std::pair<long long, double>> values) {
    GroupFunction f(Z);
    for (auto [n, v] : values) f.add(Word::integer(n), v);
    return f;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(L1Radius, Examples) {
    const RadiusEstimate nn = l1_radius(phi_t(F2, 1.0, 2), 8);
    EXPECT_EQ(nn.method, RadiusMethod::exact);
    EXPECT_EQ(nn.value, phi_t(F2, 1.0, 2).l1_norm());
    EXPECT_EQ(l1_radius(GroupFunction::delta(F2, parse_word(F2, "aB"), Complex(0.0, 1.0)), 8).value, 1.0);
    const RadiusEstimate odd = l1_radius(z_function({{1, 1.0}, {-1, -1.0}}), 64);
    EXPECT_LE(rel(odd.value, 2.0), 0.01);
}

TEST(CircleMaximumTest, Examples) {
    EXPECT_NEAR(z_reduced_norm(z_function({{1, 1.0}, {-1, 1.0}})).value, 2.0, 1e-12);
    const CircleMaximum m = z_reduced_norm(z_function({{0, 1.0}, {3, -0.5}, {-3, -0.5}}));
    EXPECT_NEAR(m.value, 2.0, 1e-12);
    EXPECT_GE(m.upper_bound, m.value);
    EXPECT_THROW(z_reduced_norm(generator_sum(F2)), DomainError);
    const GroupFunction f = random_symmetric_z(4, *std::make_unique<CounterRng>(3));
    EXPECT_EQ(z_reduced_norm(f, 1u << 12, true).value, z_reduced_norm(f, 1u << 12, false).value);
}

TEST(Gap, KestenGenerators) {
    const GapReport g = gap_report(generator_sum(F2), 8, 8);
    EXPECT_EQ(g.l1_radius, 16.0);
    EXPECT_EQ(g.reduced_method, "power_iteration");
    EXPECT_NEAR(g.reduced_squared, 11.1798, 1e-3);
    EXPECT_GT(g.gap, 4.0 / 3.0);
}

TEST(Gap, IdentityHasNoGap) {
    const GapReport g = gap_report(GroupFunction::delta(F2, Word{}), 3, 4);
    EXPECT_NEAR(g.gap, 1.0, 1e-12);
}

TEST(Gap, IntegersCloseToOne) {
    CounterRng rng(4);
    for (int i = 0; i < 5; ++i) {
        const GroupFunction f = random_symmetric_z(3, rng);
        const GapReport g = gap_report(f, 3, 64);
        EXPECT_EQ(g.reduced_method, "circle_grid");
        EXPECT_LE(std::abs(g.gap - 1.0), kTol.radius_agreement) << i;
    }
}

TEST(RadiusInterpolation, Elementary) {
    Matrix a(2, 2);
    a << 2, 1, 1, -1;
    const TensorElement x(a, Matrix::Identity(2, 2));
    const double rho = (1.0 + std::sqrt(13.0)) / 2.0;
    const auto r = radius_interpolation_check(x, SchattenIndex::one(), SchattenIndex::two(), 0.5, 8);
    EXPECT_NEAR(r.reference, rho, 1e-12);
    EXPECT_LE(rel(r.at_p.value, rho), 1e-6);
    EXPECT_LE(rel(r.at_p0.value, rho), 1e-6);
    EXPECT_LE(rel(r.at_p1.value, rho), 1e-6);
    EXPECT_TRUE(r.holds);
}

TEST(RadiusInterpolation, RandomSelfAdjoint) {
    CounterRng rng(5);
    for (int i = 0; i < 3; ++i) {
        const TensorElement x = random_self_adjoint_tensor(2, 2, 2, rng);
        EstimatorOptions o;
        o.seed = i;
        const auto r = radius_interpolation_check(x, SchattenIndex::one(), SchattenIndex::two(), 0.5, 12, o);
        EXPECT_TRUE(r.holds);
        EXPECT_GE(r.slack, -kTol.radius_interpolation_slack);
        for (const auto* e : {&r.at_p, &r.at_p0, &r.at_p1}) {
            EXPECT_GE(e->value, r.reference * (1.0 - 1e-9));
            EXPECT_LE(rel(e->value, r.reference), kTol.radius_agreement) << i;
        }
    }
    EXPECT_THROW(radius_interpolation_check(random_tensor(2, 2, 2, rng), SchattenIndex::one(), SchattenIndex::two(),
                                            0.5, 4),
                 DomainError);
}

TEST(RadiusInterpolation, Homogeneous) {
    CounterRng rng(6);
    const TensorElement x = random_self_adjoint_tensor(2, 2, 1, rng);
    const auto a = radius_interpolation_check(x, SchattenIndex::one(), SchattenIndex::two(), 0.5, 6);
    const auto b = radius_interpolation_check(x.scaled(-3.0), SchattenIndex::one(), SchattenIndex::two(), 0.5, 6);
    EXPECT_LE(rel(b.at_p.value, 3.0 * a.at_p.value), 1e-9);
    EXPECT_LE(rel(b.reference, 3.0 * a.reference), 1e-12);
}

TEST(Growth, TwoPointClosedForm) {
    const GrowthReport g = growth_bound_check(z_function({{1, 1.0}, {-1, 1.0}}), 8);
    ASSERT_GE(g.rows.size(), 2u);
    EXPECT_EQ(g.rows[1].n, 2);
    EXPECT_EQ(g.rows[1].lhs, 4.0);
    // M is the Bernstein upper side of the grid maximum, slightly above 2.
    EXPECT_GE(g.rows[1].rhs, 2.0 * std::sqrt(10.0));
    EXPECT_LE(rel(g.rows[1].rhs, 2.0 * std::sqrt(10.0)), 1e-4);
    EXPECT_EQ(g.violations, 0);
}

TEST(Growth, DeltaZero) {
    const GrowthReport g = growth_bound_check(z_function({{0, 1.0}}), 4);
    for (const auto& row : g.rows) {
        EXPECT_EQ(row.lhs, 1.0);
        EXPECT_GE(row.rhs, 1.0);
    }
}

TEST(Growth, RandomNoViolations) {
    CounterRng rng(7);
    for (int i = 0; i < 20; ++i) {
        const GrowthReport g = growth_bound_check(random_symmetric_z(1 + static_cast<int>(rng.below(5)), rng), 32);
        EXPECT_EQ(g.violations, 0);
    }
}
