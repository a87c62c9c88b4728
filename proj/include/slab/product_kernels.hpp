#pragma once

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "slab/free_group.hpp"

namespace slab {

using WordPair = std::pair<Word, Word>;

/// Finitely supported function on G1 x G2, viewed as a matrix with rows indexed
/// by ball(G1, r1) and columns by ball(G2, r2) in canonical order.
class ProductKernel {
public:
    using Support = std::map<WordPair, Complex>;

    ProductKernel(Group g1, int r1, Group g2, int r2);

    Group group1() const noexcept { return g1_; }
    Group group2() const noexcept { return g2_; }
    int radius1() const noexcept { return r1_; }
    int radius2() const noexcept { return r2_; }
    const Support& support() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    Complex operator()(const Word& s, const Word& t) const;
    /// Throws DomainError if (s, t) lies outside ball(r1) x ball(r2).
    void add(const Word& s, const Word& t, Complex c);

    ProductKernel scaled(Complex c) const;
    /// Same support and values with the radii shrunk to the support.
    ProductKernel trimmed() const;

private:
    Group g1_, g2_;
    int r1_, r2_;
    Support values_;
};

bool operator==(const ProductKernel& a, const ProductKernel& b);

/// Dense matrix; throws SizeError above max_entries.
Matrix kernel_matrix(const ProductKernel& f, std::size_t max_entries = 16'000'000);
ProductKernel kernel_from_matrix(Group g1, int r1, Group g2, int r2, const Matrix& m);

/// Schatten norm of the kernel matrix without forming it: the nonzero pattern
/// splits into connected row/column blocks whose singular values are pooled.
double kernel_schatten_norm(const ProductKernel& f, SchattenIndex p);
RealVector kernel_singular_values(const ProductKernel& f);

/// (s, s) -> phi(s) for s in ball(radius).
ProductKernel diagonal_lift(const GroupFunction& phi, int radius);

/// phi_t1(s) phi_t2(t) on ball(r1) x ball(r2).
ProductKernel product_phi(Group g1, double t1, int r1, Group g2, double t2, int r2);

/// Entrywise product on the support of f.
ProductKernel schur_multiply(const ProductKernel& u, const ProductKernel& f);
ProductKernel schur_multiply(const std::function<Complex(const Word&, const Word&)>& u, const ProductKernel& f);

/// Convolution in G1 x G2; radii of the result are those of its support.
ProductKernel convolve_kernels(const ProductKernel& f, const ProductKernel& g);
ProductKernel kernel_involution(const ProductKernel& f);

struct CHHEntry {
    int n = 0;
    double value = 0.0;  // ||(f^* * f)^{*n}||_{S_q}^{1/(2n)}
    int radius1 = 0;
    int radius2 = 0;
};

struct CHHSequence {
    SchattenIndex q = SchattenIndex::two();
    std::vector<CHHEntry> entries;
    bool radial_path = false;  // computed in the radial algebra of a diagonal lift
};

/// Root sequence of Schatten norms of exact convolution powers. A diagonal lift
/// of a radial function is handled in closed form in the radial algebra; other
/// kernels go through sparse convolution with a support cap.
CHHSequence chh_sequence(const ProductKernel& f, SchattenIndex q, int n_max, std::size_t support_cap = 1'000'000);

/// Coefficients c_n with f = sum c_n chi_n, chi_n the indicator of sphere(n),
/// or nothing if f is not radial.
std::optional<std::vector<Complex>> radial_coefficients(const GroupFunction& f);
/// Convolution of radial functions on F_r given by sphere coefficients.
std::vector<Complex> radial_convolve(int rank, const std::vector<Complex>& a, const std::vector<Complex>& b);

struct GramReport {
    std::size_t size = 0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};

/// Minimum eigenvalue of the Hermitian part of [phi(s^-1 s')] over ball(R).
GramReport pd_gram_check(Group g, const std::function<Complex(const Word&)>& phi, int radius);
/// Same with phi given by a finitely supported function (zero off its support).
GramReport pd_gram_check(const GroupFunction& phi, int radius);

ProductKernel random_kernel(Group g1, int r1, Group g2, int r2, std::size_t terms, CounterRng& rng);

}  // namespace slab
