#pragma once

#include <cstdint>
#include <vector>

#include "slab/matrix_core.hpp"

namespace slab {

/// Linear map T -> sum_i L_i T R_i^T on rows x cols matrices.
class TwoSidedMap {
public:
    TwoSidedMap(std::vector<Matrix> left, std::vector<Matrix> right);

    Eigen::Index rows() const noexcept { return rows_; }
    Eigen::Index cols() const noexcept { return cols_; }
    std::size_t terms() const noexcept { return left_.size(); }
    const std::vector<Matrix>& left() const noexcept { return left_; }
    const std::vector<Matrix>& right() const noexcept { return right_; }

    Matrix apply(const Matrix& t) const;
    /// Adjoint for the Hilbert-Schmidt inner product: W -> sum L_i^* W conj(R_i).
    Matrix hs_adjoint_apply(const Matrix& w) const;
    /// Adjoint for the bilinear pairing Tr(A^T B): S -> sum L_i^T S R_i.
    TwoSidedMap trace_dual() const;
    TwoSidedMap conjugate() const;

    /// Matrix of the map on column-major vec: sum kron(R_i, L_i).
    Matrix vectorized() const;

private:
    std::vector<Matrix> left_;
    std::vector<Matrix> right_;
    std::vector<Matrix> right_t_;
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
};

struct AscentResult {
    double value = 0.0;
    Matrix witness;  // unit in S_p with ||Phi(witness)||_p = value
    int iterations = 0;
    double residual = 0.0;  // last relative increment
};

/// Monotone dual ascent for ||Phi||_{S_p -> S_p} from one start. Each step takes
/// the norming functional W of Phi(T), pulls it back through the adjoint, and
/// moves to the S_p unit matrix that norms the pullback; the objective never
/// decreases and every iterate is a feasible point.
AscentResult dual_ascent(const TwoSidedMap& phi, SchattenIndex p, const Matrix& start, int max_iterations,
                         double tolerance);

struct MapNormOptions {
    int restarts = 8;
    std::uint64_t seed = 0;
    int max_iterations = 3000;
    double tolerance = 1e-14;
    bool parallel = true;
    /// Extra starting points in the primal space (rows x cols). For p > 2 they
    /// are converted to starts of the dual problem.
    std::vector<Matrix> warm_starts;
};

struct MapNormResult {
    double value = 0.0;
    Matrix witness;  // primal, unit in S_p
    int iterations = 0;
    int starts = 0;
    double residual = 0.0;
    bool exact = false;
};

/// sigma_max of vectorized(); exact S_2 -> S_2 norm.
MapNormResult map_two_norm(const TwoSidedMap& phi);

/// Best of several dual ascents. For p > 2 the ascent runs on the trace dual at
/// the conjugate exponent (same operator norm) and the dual witness is converted
/// back into a primal one. The start family always contains the S_2 maximizer;
/// the random part is closed under entrywise conjugation and, on square shapes,
/// under transposition.
MapNormResult estimate_map_norm(const TwoSidedMap& phi, SchattenIndex p, const MapNormOptions& options);

/// Random start matrices of the given shape. Drawn in the canonical shape
/// (min, max) and transposed when rows > cols, so that the families for a shape
/// and its transpose correspond.
std::vector<Matrix> random_start_family(Eigen::Index rows, Eigen::Index cols, int restarts, std::uint64_t seed);

}  // namespace slab
