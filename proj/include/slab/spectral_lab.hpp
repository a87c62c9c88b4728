#pragma once

#include <string>
#include <vector>

#include "slab/free_group.hpp"
#include "slab/tensor_norms.hpp"

namespace slab {

enum class RadiusMethod { power_norms, fekete, exact };
const char* to_string(RadiusMethod m) noexcept;

struct RadiusEstimate {
    double value = 0.0;
    RadiusMethod method = RadiusMethod::fekete;
    int n_used = 0;
    std::vector<std::pair<int, double>> sequence;  // (n, ||x^n||^{1/n})
};

/// Fekete estimate inf_n ||f^{*n}||_1^{1/n} over n <= n_max. Nonnegative f
/// returns ||f||_1 with method exact.
RadiusEstimate l1_radius(const GroupFunction& f, int n_max, std::size_t support_cap = 1'000'000);

struct CircleMaximum {
    double value = 0.0;        // max over the grid of |f^(theta)|
    double upper_bound = 0.0;  // value / (1 - pi R0 / N), Bernstein
    std::size_t grid = 0;
};

/// max |sum_n f(n) e^{i n theta}| over a uniform grid on the circle; this is
/// ||lambda(f)|| on Z.
CircleMaximum z_reduced_norm(const GroupFunction& f, std::size_t grid = 1u << 16, bool parallel = true);

struct GapReport {
    double l1_radius = 0.0;       // r_{l1}(f^* * f)
    RadiusMethod l1_method = RadiusMethod::fekete;
    double reduced_squared = 0.0;  // ||lambda(f)||^2 estimate
    double gap = 0.0;              // l1_radius / reduced_squared
    int radius = 0;
    int n_used = 0;
    std::string reduced_method;  // "power_iteration" on F_r, "circle_grid" on Z
};

/// r_{l1}(f^* * f) against the squared reduced norm of f.
GapReport gap_report(const GroupFunction& f, int radius, int n_max);

struct RadiusInterpolationReport {
    SchattenIndex p0 = SchattenIndex::one(), p1 = SchattenIndex::one(), p = SchattenIndex::one();
    double theta = 0.0;
    RadiusEstimate at_p, at_p0, at_p1;
    double reference = 0.0;  // spectral radius of pi_matrix(x)
    double rhs = 0.0;
    double slack = 0.0;
    bool holds = false;
};

/// r_p <= r_p0^{1-theta} r_p1^theta with each r from ||x^n||^{1/n} in the
/// symmetrized norms, powers taken in the algebraic tensor product.
RadiusInterpolationReport radius_interpolation_check(const TensorElement& x, SchattenIndex p0, SchattenIndex p1,
                                                     double theta, int n_max, const EstimatorOptions& options = {});

struct GrowthRow {
    int n = 0;
    double lhs = 0.0;  // ||f^{*n}||_1
    double rhs = 0.0;  // M^{n-1} ||f||_2 (2 n R0 + 1)^{1/2}
    double slack = 0.0;
};

struct GrowthReport {
    double reduced_norm = 0.0;  // M, upper side of the circle maximum
    double bernstein_error = 0.0;
    int support_radius = 0;
    std::vector<GrowthRow> rows;
    int violations = 0;
};

GrowthReport growth_bound_check(const GroupFunction& f, int n_max);

/// Real symmetric f on Z with support in [-radius, radius].
GroupFunction random_symmetric_z(int radius, CounterRng& rng);

}  // namespace slab
