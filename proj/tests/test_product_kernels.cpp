#include <gtest/gtest.h>

#include <cmath>

#include "slab/errors.hpp"
#include "slab/product_kernels.hpp"
#include "slab/tolerances.hpp"

using namespace slab;

namespace {

const Group F2 = Group::free2();
const Group Z = Group::integers();

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Kernel, Validation) {
    ProductKernel f(F2, 1, F2, 1);
    EXPECT_THROW(f.add(parse_word(F2, "ab"), Word{}, 1.0), DomainError);
    f.add(Word{}, Word{}, 0.0);
    EXPECT_EQ(f.size(), 0u);
}

TEST(KernelMatrix, DeltaAndRoundTrip) {
    ProductKernel d(F2, 1, F2, 2);
    d.add(Word{}, Word{}, 1.0);
    EXPECT_EQ(kernel_matrix(d), matrix_unit(5, 17, 0, 0));
    CounterRng rng(1);
    for (int i = 0; i < 100; ++i) {
        const ProductKernel f = random_kernel(F2, 2, Z, 3, 10, rng);
        EXPECT_EQ(kernel_from_matrix(F2, 2, Z, 3, kernel_matrix(f)), f);
    }
}

TEST(DiagonalLift, Examples) {
    const ProductKernel e = diagonal_lift(GroupFunction::delta(F2, Word{}), 2);
    EXPECT_EQ(kernel_matrix(e), matrix_unit(17, 17, 0, 0));
    for (double p : {1.0, 2.0, 4.0, (double)INFINITY}) EXPECT_EQ(kernel_schatten_norm(e, SchattenIndex(p)), 1.0);

    const GroupFunction phi = phi_t(F2, 0.5, 3);
    const Matrix m = kernel_matrix(diagonal_lift(phi, 3));
    const auto b = ball(F2, 3);
    EXPECT_LE((m - m.diagonal().asDiagonal().toDenseMatrix()).norm(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(m(i, i), phi(b[i]));
}

TEST(DiagonalLift, SchattenNormIsLpPartialSum) {
    for (double t : {0.5, 1.0, 2.0}) {
        for (int r = 0; r <= 8; ++r) {
            const GroupFunction phi = phi_t(F2, t, r);
            const ProductKernel d = diagonal_lift(phi, r);
            for (double p : {1.0, 2.0, 4.0, (double)INFINITY}) {
                const SchattenIndex q(p);
                EXPECT_LE(rel(kernel_schatten_norm(d, q), phi.lp_norm(q)), kTol.diagonal_identity) << t << " " << r;
            }
            EXPECT_EQ(kernel_schatten_norm(d, SchattenIndex::infinity()), 1.0);
        }
    }
}

TEST(SparseNorm, MatchesDense) {
    CounterRng rng(2);
    for (int i = 0; i < 20; ++i) {
        const ProductKernel f = random_kernel(F2, 2, F2, 2, 30, rng);
        const Matrix m = kernel_matrix(f);
        for (double p : {1.0, 1.5, 2.0, 4.0, (double)INFINITY}) {
            const SchattenIndex q(p);
            EXPECT_LE(rel(kernel_schatten_norm(f, q), schatten_norm(m, q)), 1e-12);
        }
    }
}

TEST(Schur, IdentityMultiplier) {
    CounterRng rng(3);
    const ProductKernel f = random_kernel(F2, 2, F2, 2, 12, rng);
    EXPECT_EQ(schur_multiply([](const Word&, const Word&) { return Complex(1.0); }, f), f);
}

TEST(Schur, ShiftIdentity) {
    for (double s : {0.3, 0.5}) {
        for (double t : {0.2, 0.7}) {
            const ProductKernel lhs = schur_multiply(product_phi(F2, t, 4, F2, t, 4), diagonal_lift(phi_t(F2, s, 4), 4));
            const ProductKernel rhs = diagonal_lift(phi_t(F2, s + 2 * t, 4), 4);
            ASSERT_EQ(lhs.size(), rhs.size());
            for (const auto& [key, v] : rhs.support()) {
                const Complex l = lhs(key.first, key.second);
                ASSERT_NE(l, Complex(0.0));
                EXPECT_LE(std::abs(l - v) / std::abs(v), kTol.shift_identity);
            }
        }
    }
}

TEST(Schur, PhiMultipliersContract) {
    CounterRng rng(4);
    const ProductKernel u = product_phi(F2, 0.7, 2, F2, 0.7, 2);
    for (int i = 0; i < 20; ++i) {
        const ProductKernel f = random_kernel(F2, 2, F2, 2, 15, rng);
        const ProductKernel uf = schur_multiply(u, f);
        for (double p : {1.0, 2.0, 4.0, (double)INFINITY}) {
            const SchattenIndex q(p);
            const double before = kernel_schatten_norm(f, q);
            EXPECT_LE(kernel_schatten_norm(uf, q), before + kTol.schur_slack * std::max(1.0, before));
        }
    }
    EXPECT_THROW(schur_multiply(product_phi(F2, 0.7, 1, F2, 0.7, 1), random_kernel(F2, 2, F2, 2, 3, rng)), DomainError);
}

TEST(KernelConvolution, MatchesGroupConvolutionOnDiagonal) {
    CounterRng rng(5);
    const GroupFunction a = random_sparse_function(F2, 1, 4, rng), b = random_sparse_function(F2, 1, 4, rng);
    const ProductKernel c = convolve_kernels(diagonal_lift(a, 1), diagonal_lift(b, 1));
    const GroupFunction ab = convolve(a, b);
    for (const auto& [x, v] : ab.support()) EXPECT_LE(std::abs(c(x, x) - v), 1e-14);
    EXPECT_EQ(kernel_involution(diagonal_lift(a, 1)), diagonal_lift(involution(a), 1));
}

TEST(CHH, DeltaIsOne) {
    ProductKernel d(F2, 1, F2, 1);
    d.add(Word{}, Word{}, 1.0);
    const CHHSequence s = chh_sequence(d, SchattenIndex::two(), 6);
    ASSERT_EQ(s.entries.size(), 6u);
    for (const auto& e : s.entries) EXPECT_NEAR(e.value, 1.0, 1e-14);
}

TEST(CHH, RadialPathMatchesGeneralPath) {
    ProductKernel f(F2, 1, F2, 1);
    for (int c = 0; c < 4; ++c) f.add(Word::letter(c), Word::letter(c), 1.0);
    const CHHSequence fast = chh_sequence(f, SchattenIndex::two(), 4);
    EXPECT_TRUE(fast.radial_path);
    f.add(Word::letter(0), Word::letter(1), 1e-300);  // breaks the radial shape, changes nothing numerically
    const CHHSequence slow = chh_sequence(f, SchattenIndex::two(), 4);
    EXPECT_FALSE(slow.radial_path);
    for (std::size_t n = 0; n < 4; ++n) EXPECT_LE(rel(fast.entries[n].value, slow.entries[n].value), 1e-12);
}

TEST(CHH, GeneratorFixtureClimbsBelowKestenLimit) {
    ProductKernel f(F2, 1, F2, 1);
    for (int c = 0; c < 4; ++c) f.add(Word::letter(c), Word::letter(c), 1.0);
    const CHHSequence s = chh_sequence(f, SchattenIndex::two(), 8);
    // Frozen values. By hand f^* * f = 4 delta_e + (12 words of length 2), so c_1 = 28^(1/4).
    const double expect[8] = {2.300327, 2.600580, 2.759952, 2.862107, 2.934405, 2.988836, 3.031595, 3.066247};
    for (int n = 0; n < 8; ++n) {
        EXPECT_NEAR(s.entries[n].value, expect[n], 1e-6);
        if (n > 0) EXPECT_GT(s.entries[n].value, s.entries[n - 1].value);
        EXPECT_LT(s.entries[n].value, 2.0 * std::sqrt(3.0));
    }
}

TEST(CHH, Homogeneous) {
    CounterRng rng(6);
    const ProductKernel f = random_kernel(F2, 1, F2, 1, 4, rng);
    const CHHSequence a = chh_sequence(f, SchattenIndex::two(), 3);
    const CHHSequence b = chh_sequence(f.scaled(Complex(0.0, -2.5)), SchattenIndex::two(), 3);
    for (std::size_t n = 0; n < 3; ++n) EXPECT_LE(rel(b.entries[n].value, 2.5 * a.entries[n].value), 1e-12);
}

TEST(Gram, Examples) {
    const GramReport d = pd_gram_check(GroupFunction::delta(F2, Word{}), 2);
    EXPECT_NEAR(d.min_eigenvalue, 1.0, 1e-14);
    EXPECT_NEAR(d.max_eigenvalue, 1.0, 1e-14);
    const GramReport phi = pd_gram_check(phi_t(F2, 0.3, 8), 4);
    EXPECT_GE(phi.min_eigenvalue, kTol.psd_min_eigenvalue);
    const GramReport len =
        pd_gram_check(F2, [](const Word& s) { return Complex(static_cast<double>(s.length())); }, 2);
    EXPECT_LT(len.min_eigenvalue, -1.0);
}
