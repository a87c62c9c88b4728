#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slab/matrix_core.hpp"
#include "slab/schatten_map.hpp"

namespace slab {

struct TensorTerm {
    Matrix a;
    Matrix b;
};

/// x = sum_i a_i (x) b_i with square a_i of one size and square b_i of another.
class TensorElement {
public:
    explicit TensorElement(std::vector<TensorTerm> terms);
    TensorElement(Matrix a, Matrix b);

    Eigen::Index dim_a() const noexcept { return dim_a_; }
    Eigen::Index dim_b() const noexcept { return dim_b_; }
    const std::vector<TensorTerm>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    TensorElement scaled(Complex c) const;

private:
    std::vector<TensorTerm> terms_;
    Eigen::Index dim_a_ = 0;
    Eigen::Index dim_b_ = 0;
};

enum class EstimateKind { exact, upper_bound, lower_bound, iterate };
const char* to_string(EstimateKind kind) noexcept;
/// The less certain of two kinds (exact < lower/upper bound < iterate).
EstimateKind weaker(EstimateKind a, EstimateKind b) noexcept;

struct NormEstimate {
    double value = 0.0;
    EstimateKind kind = EstimateKind::exact;
    int iterations = 0;
    int restarts = 0;
    double residual = 0.0;
    Matrix witness;  // unit T in S_p with ||Pi(x)T||_p = value (amplified shape); may be empty
};

struct EstimatorOptions {
    int restarts = 8;
    std::uint64_t seed = 0;
    int max_iterations = 3000;
    double tolerance = 1e-14;
    bool parallel = true;
    std::vector<Matrix> warm_starts;  // amplified shape
};

/// Pi(x)T = sum a_i T b_i^T; b_i^T is the matrix of the Banach adjoint of b_i in conjugate bases.
Matrix pi_apply(const TensorElement& x, const Matrix& t);
/// sum kron(b_i, a_i): pi_matrix(x) vec(T) = vec(pi_apply(x, T)) for column-major vec.
Matrix pi_matrix(const TensorElement& x);
/// sigma_max(pi_matrix(x)), the minimal C*-tensor norm.
double min_norm(const TensorElement& x);

/// Terms (a_i (x) I_k, b_i (x) I_k).
TensorElement amplify(const TensorElement& x, int k);
TwoSidedMap as_map(const TensorElement& x);

/// ||Pi(x)||_{S_p -> S_p} on the k-fold amplification.
NormEstimate schatten_op_norm(const TensorElement& x, SchattenIndex p, int k, const EstimatorOptions& options = {});
/// Estimates for k = 1..k_max; each level starts from the embedded witness of the
/// previous one, so the values are nondecreasing.
std::vector<NormEstimate> amplification_ladder(const TensorElement& x, SchattenIndex p, int k_max,
                                               const EstimatorOptions& options = {});
/// Isometric embedding of a level-k witness into level k+1.
Matrix embed_amplified(const Matrix& t, Eigen::Index dim_a, Eigen::Index dim_b, int k);

/// max of the norms at p and at holder(p).
NormEstimate symmetrized_norm(const TensorElement& x, SchattenIndex p, int k, const EstimatorOptions& options = {});

TensorElement adjoint_tensor(const TensorElement& x);
/// sum b_i (x) a_i.
TensorElement flip(const TensorElement& x);
/// sum (u a_i u^*) (x) (v b_i v^*).
TensorElement unitary_conjugate(const TensorElement& x, const Matrix& u, const Matrix& v);
/// a_i -> a_i (+) 0_{extra_a}, b_i -> b_i (+) 0_{extra_b}.
TensorElement corner_embed(const TensorElement& x, Eigen::Index extra_a, Eigen::Index extra_b);
/// sum (V^* a_i V) (x) (W^* b_i W) with V: d_A x d_A', W: d_B x d_B'.
TensorElement compress(const TensorElement& x, const Matrix& v, const Matrix& w);

/// Shortest representation with the same value, from an SVD of the realignment
/// sum vec(a_i) vec(b_i)^T. Terms below the rank cutoff are dropped; the zero
/// element keeps one zero term.
TensorElement minimal_form(const TensorElement& x);
/// Product in the algebraic tensor product, returned in minimal form.
TensorElement multiply(const TensorElement& x, const TensorElement& y);
TensorElement power(const TensorElement& x, int n);
bool is_self_adjoint(const TensorElement& x, double tolerance = 1e-12);

struct HaagerupOptions {
    int restarts = 8;
    std::uint64_t seed = 0;
    int max_iterations = 400;
};

/// inf over invertible alpha of ||sum c_j c_j^*||^{1/2} ||sum d_j d_j^*||^{1/2},
/// c = alpha a, d = alpha^{-T} b, on a minimal representation. The second factor
/// is the row norm in the opposite algebra. Always an upper bound.
NormEstimate haagerup_norm(const TensorElement& x, const HaagerupOptions& options = {});
/// Objective at a given change of basis (rows of alpha act on the terms of minimal_form(x)).
double haagerup_objective(const TensorElement& minimal, const Matrix& alpha);

struct InterpolationReport {
    SchattenIndex p0, p1, p;
    double theta;
    NormEstimate at_p, at_p0, at_p1;
    double rhs;    // at_p0^{1-theta} at_p1^theta
    double slack;  // rhs - at_p
    bool holds;    // slack >= -tolerance
};

/// Interpolated exponent: 1/p = (1-theta)/p0 + theta/p1.
SchattenIndex interpolate_index(SchattenIndex p0, SchattenIndex p1, double theta);
/// ||x||_p <= ||x||_{p0}^{1-theta} ||x||_{p1}^theta. The endpoint estimates are
/// warm-started with the boundary images of the witness at p, so the right side
/// is at least what that witness certifies.
InterpolationReport verify_interpolation(const TensorElement& x, SchattenIndex p0, SchattenIndex p1, double theta,
                                         int k, const EstimatorOptions& options = {});

struct SandwichReport {
    double min_norm;
    NormEstimate at_inf, at_one;
    double geometric_mean;  // sqrt(at_inf * at_one)
    double symmetrized;     // max(at_inf, at_one)
    double slack_mean;      // geometric_mean - min_norm
    double slack_symmetrized;
    bool holds;
};

SandwichReport max_norm_sandwich(const TensorElement& x, int k, const EstimatorOptions& options = {});

/// Random element with entries of unit complex Gaussian scale.
TensorElement random_tensor(Eigen::Index dim_a, Eigen::Index dim_b, std::size_t terms, CounterRng& rng);
/// Random element with x = x^* (terms (A, B) and (A^*, B^*) paired, then halved).
TensorElement random_self_adjoint_tensor(Eigen::Index dim_a, Eigen::Index dim_b, std::size_t terms, CounterRng& rng);

}  // namespace slab
