#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>

#include "slab/rng.hpp"

namespace slab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Exponent p in [1, inf] of a Schatten class. Stored through 1/p so that
/// infinity is exact and Hoelder conjugation 1/q = 1 - 1/p loses nothing for
/// dyadic exponents (holder(4/3) is exactly 4).
class SchattenIndex {
public:
    /// Throws DomainError for p < 1 or NaN. Accepts +inf.
    explicit SchattenIndex(double p);

    static SchattenIndex infinity() noexcept { return SchattenIndex(Inverse{0.0}); }
    static SchattenIndex one() noexcept { return SchattenIndex(Inverse{1.0}); }
    static SchattenIndex two() noexcept { return SchattenIndex(Inverse{0.5}); }
    /// From 1/p in [0, 1].
    static SchattenIndex from_inverse(double inverse);

    double p() const noexcept {
        return inverse_ == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inverse_;
    }
    double inverse() const noexcept { return inverse_; }
    bool is_infinite() const noexcept { return inverse_ == 0.0; }
    bool is_one() const noexcept { return inverse_ == 1.0; }
    bool is_two() const noexcept { return inverse_ == 0.5; }

    SchattenIndex holder() const noexcept { return SchattenIndex(Inverse{1.0 - inverse_}); }

    friend bool operator==(SchattenIndex a, SchattenIndex b) noexcept { return a.inverse_ == b.inverse_; }
    friend bool operator!=(SchattenIndex a, SchattenIndex b) noexcept { return !(a == b); }

private:
    struct Inverse {
        double value;
    };
    explicit SchattenIndex(Inverse inv) noexcept : inverse_(inv.value) {}

    double inverse_;
};

/// Thin SVD, M = u * diag(s) * v^*, s nonincreasing.
struct Svd {
    Matrix u;
    RealVector s;
    Matrix v;
};

void require_finite(const Matrix& m, const char* what);

Svd svd(const Matrix& m);
RealVector singular_values(const Matrix& m);

/// (sum sigma_i^p)^(1/p); max sigma at p = inf.
double schatten_norm(const Matrix& m, SchattenIndex p);
double schatten_norm_of_values(const RealVector& sigma, SchattenIndex p);
double operator_norm(const Matrix& m);

/// Tr(A^T B) = sum_ij A_ij B_ij.
Complex trace_pairing(const Matrix& a, const Matrix& b);

Matrix adjoint(const Matrix& m);
Matrix conj(const Matrix& m);
Matrix transpose(const Matrix& m);

/// Frobenius-side duality map: the W with ||W||_{S_q} = 1 and
/// Re Tr(W^* Y) = ||Y||_{S_p}, built in the singular basis of Y
/// (sigma_i -> sigma_i^(p-1) / ||Y||_p^(p-1); p = 1 gives the partial isometry of
/// the polar decomposition, p = inf the top singular pair). Zero Y maps to zero.
Matrix duality_map(const Matrix& y, SchattenIndex p);
/// Same, from a precomputed SVD of Y.
Matrix duality_map(const Svd& y, SchattenIndex p);

/// Norming functional for the bilinear pairing Tr(M^T N): ||N||_{S_q} = 1 and
/// Tr(M^T N) = ||M||_{S_p}.
Matrix norming_functional(const Matrix& m, SchattenIndex p);

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, CounterRng& rng);
/// Haar-distributed unitary via QR of a complex Gaussian with phase correction.
Matrix random_unitary(Eigen::Index n, CounterRng& rng);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix matrix_unit(Eigen::Index rows, Eigen::Index cols, Eigen::Index i, Eigen::Index j);

/// Column-major vectorization and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

}  // namespace slab
