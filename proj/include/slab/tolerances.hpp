#pragma once

#include <cstddef>

namespace slab {

// Every numeric threshold used by the library and its checks lives here.
struct Tolerances {
    // matrix_core
    double svd_reconstruction = 1e-10;  // relative to ||M||_F
    double frobenius_match = 1e-12;
    double unitary_invariance = 1e-10;
    double duality_match = 1e-6;
    double rank_cutoff = 1e-14;  // singular values below cutoff * sigma_max are treated as zero

    // tensor_norms
    double cross_norm_exact = 1e-8;    // p in {1, 2, inf}
    double cross_norm_general = 1e-3;  // other p
    double p2_identification = 1e-8;   // relative to sigma_max
    double adjoint_symmetry = 1e-3;
    double adjoint_symmetry_exact = 1e-8;
    double flip_invariance = 1e-3;
    double unitary_norm_invariance = 1e-8;
    double corner_invariance = 1e-8;
    double functorial_slack = 1e-9;
    double amplification_slack = 1e-9;
    double interpolation_slack = 1e-9;
    double sandwich_slack = 1e-9;
    double haagerup_gap = 0.05;
    double haagerup_fixture = 1e-6;
    double estimate_order_slack = 1e-9;  // lower_bound <= upper_bound

    // free_group / product_kernels
    double convolution_associativity = 1e-12;
    double reduced_norm_monotone = 1e-10;
    double psd_min_eigenvalue = -1e-9;
    double schur_slack = 1e-9;
    double diagonal_identity = 1e-12;
    double shift_identity = 1e-13;  // relative; exp is not exactly multiplicative in floating point
    double threshold_ratio = 1e-12;
    double chh_gap = 0.05;

    // spectral_lab
    double radius_interpolation_slack = 1e-6;
    double radius_agreement = 0.02;
    double z_equality = 0.01;
    double growth_slack = 1e-9;
    double kesten_gap_min = 1.30;
    double kesten_reduced_sq_lo = 11.6;
    double kesten_reduced_sq_hi = 12.0;

    // iteration controls
    int power_max_iterations = 1000;
    double power_relative_increment = 1e-10;
    int ascent_max_iterations = 3000;
    double ascent_relative_increment = 1e-14;
    int default_restarts = 8;
    std::size_t support_cap = 1'000'000;
    std::size_t circle_grid = 1u << 16;
};

inline constexpr Tolerances kTol{};

}  // namespace slab
