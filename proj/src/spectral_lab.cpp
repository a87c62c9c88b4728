#include "slab/spectral_lab.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "slab/errors.hpp"
#include "slab/tolerances.hpp"

namespace slab {

const char* to_string(RadiusMethod m) noexcept {
    switch (m) {
        case RadiusMethod::power_norms: return "power_norms";
        case RadiusMethod::fekete: return "fekete";
        case RadiusMethod::exact: return "exact";
    }
    return "fekete";
}

RadiusEstimate l1_radius(const GroupFunction& f, int n_max, std::size_t support_cap) {
    if (n_max < 1) throw DomainError("l1_radius needs n_max >= 1");
    RadiusEstimate out;
    if (f.empty()) {
        out.method = RadiusMethod::exact;
        out.n_used = 1;
        out.sequence.push_back({1, 0.0});
        return out;
    }
    if (f.is_nonnegative()) {
        // ||f^{*n}||_1 = ||f||_1^n for nonnegative f.
        out.method = RadiusMethod::exact;
        out.value = f.l1_norm();
        out.n_used = 1;
        out.sequence.push_back({1, out.value});
        return out;
    }
    out.method = RadiusMethod::fekete;
    GroupFunction power = f;
    double best = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) {
            if (power.size() * f.size() > 64 * support_cap) {
                throw SizeError("l1_radius: power " + std::to_string(n) + " would exceed the support cap");
            }
            power = convolve(power, f);
            if (power.size() > support_cap) {
                throw SizeError("l1_radius: support of power " + std::to_string(n) + " exceeds cap " +
                                std::to_string(support_cap));
            }
        }
        const double norm = power.l1_norm();
        const double root = norm > 0.0 ? std::exp(std::log(norm) / n) : 0.0;
        out.sequence.push_back({n, root});
        best = std::min(best, root);
        out.n_used = n;
        if (norm == 0.0) break;  // nilpotent: radius zero
    }
    out.value = best;
    return out;
}

CircleMaximum z_reduced_norm(const GroupFunction& f, std::size_t grid, bool parallel) {
    if (f.group() != Group::integers()) throw DomainError("z_reduced_norm: function must live on Z");
    if (grid < 8) throw DomainError("z_reduced_norm: grid too coarse");
    std::vector<std::pair<double, Complex>> terms;
    for (const auto& [w, c] : f.support()) terms.push_back({static_cast<double>(w.exponent_sum()), c});
    const double step = 2.0 * std::numbers::pi / static_cast<double>(grid);
    double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best) if (parallel)
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(grid); ++j) {
        const double theta = step * static_cast<double>(j);
        Complex acc(0.0);
        for (const auto& [n, c] : terms) acc += c * std::polar(1.0, n * theta);
        best = std::max(best, std::abs(acc));
    }
    CircleMaximum out;
    out.value = best;
    out.grid = grid;
    // |f'| <= R0 max|f| (Bernstein); the grid misses the peak by at most half a step.
    const double r0 = static_cast<double>(f.radius());
    const double loss = std::numbers::pi * r0 / static_cast<double>(grid);
    if (loss >= 1.0) throw DomainError("z_reduced_norm: grid too coarse for the support radius");
    out.upper_bound = best / (1.0 - loss);
    return out;
}

GapReport gap_report(const GroupFunction& f, int radius, int n_max) {
    if (f.empty()) throw DomainError("gap_report: zero function");
    GapReport rep;
    rep.radius = radius;
    const GroupFunction h = convolve(involution(f), f);
    const RadiusEstimate l1 = l1_radius(h, n_max);
    rep.l1_radius = l1.value;
    rep.l1_method = l1.method;
    rep.n_used = l1.n_used;
    if (f.group() == Group::integers()) {
        const double m = z_reduced_norm(f).value;
        rep.reduced_squared = m * m;
        rep.reduced_method = "circle_grid";
    } else {
        const double r = reduced_norm_estimate(f, radius).value;
        rep.reduced_squared = r * r;
        rep.reduced_method = "power_iteration";
    }
    rep.gap = rep.l1_radius / rep.reduced_squared;
    return rep;
}

namespace {

RadiusEstimate fekete(const std::vector<double>& norms) {
    RadiusEstimate r;
    r.method = RadiusMethod::power_norms;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        const double root = norms[i] > 0.0 ? std::exp(std::log(norms[i]) / n) : 0.0;
        r.sequence.push_back({n, root});
        best = std::min(best, root);
    }
    r.value = best;
    r.n_used = static_cast<int>(norms.size());
    return r;
}

}  // namespace

RadiusInterpolationReport radius_interpolation_check(const TensorElement& x, SchattenIndex p0, SchattenIndex p1,
                                                     double theta, int n_max, const EstimatorOptions& options) {
    if (n_max < 1) throw DomainError("radius_interpolation_check needs n_max >= 1");
    if (!is_self_adjoint(x, 1e-10)) throw DomainError("radius_interpolation_check: x must be self-adjoint");
    RadiusInterpolationReport rep;
    rep.p0 = p0;
    rep.p1 = p1;
    rep.theta = theta;
    rep.p = interpolate_index(p0, p1, theta);

    std::vector<double> n0, n1, np;
    TensorElement power = minimal_form(x);
    const TensorElement base = power;
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) power = multiply(power, base);
        EstimatorOptions o = options;
        o.seed = options.seed + static_cast<std::uint64_t>(n);
        np.push_back(symmetrized_norm(power, rep.p, 1, o).value);
        n0.push_back(symmetrized_norm(power, p0, 1, o).value);
        n1.push_back(symmetrized_norm(power, p1, 1, o).value);
    }
    rep.at_p = fekete(np);
    rep.at_p0 = fekete(n0);
    rep.at_p1 = fekete(n1);

    Eigen::ComplexEigenSolver<Matrix> es(pi_matrix(x), false);
    rep.reference = es.eigenvalues().cwiseAbs().maxCoeff();
    rep.rhs = std::pow(rep.at_p0.value, 1.0 - theta) * std::pow(rep.at_p1.value, theta);
    rep.slack = rep.rhs - rep.at_p.value;
    rep.holds = rep.slack >= -kTol.radius_interpolation_slack;
    return rep;
}

GrowthReport growth_bound_check(const GroupFunction& f, int n_max) {
    if (f.group() != Group::integers()) throw DomainError("growth_bound_check: function must live on Z");
    if (f.empty()) throw DomainError("growth_bound_check: zero function");
    if (n_max < 1) throw DomainError("growth_bound_check needs n_max >= 1");
    GrowthReport rep;
    const CircleMaximum m = z_reduced_norm(f);
    rep.reduced_norm = m.upper_bound;
    rep.bernstein_error = m.upper_bound - m.value;
    rep.support_radius = f.radius();
    const double l2 = f.l2_norm();
    GroupFunction power = f;
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) power = convolve(power, f);
        GrowthRow row;
        row.n = n;
        row.lhs = power.l1_norm();
        row.rhs = std::pow(rep.reduced_norm, n - 1) * l2 *
                  std::sqrt(2.0 * n * static_cast<double>(rep.support_radius) + 1.0);
        row.slack = row.rhs - row.lhs;
        if (row.slack < -kTol.growth_slack * std::max(1.0, row.rhs)) ++rep.violations;
        rep.rows.push_back(row);
    }
    return rep;
}

GroupFunction random_symmetric_z(int radius, CounterRng& rng) {
    if (radius < 0) throw DomainError("radius must be >= 0");
    const Group z = Group::integers();
    GroupFunction f(z);
    f.add(Word::integer(0), rng.normal());
    for (int k = 1; k <= radius; ++k) {
        const double v = rng.normal();
        f.add(Word::integer(k), v);
        f.add(Word::integer(-k), v);
    }
    return f;
}

}  // namespace slab
