// Acceptance checks: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here. Usage: slab_acceptance [criterion...]
#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "slab/experiment.hpp"
#include "slab/free_group.hpp"
#include "slab/product_kernels.hpp"
#include "slab/spectral_lab.hpp"
#include "slab/tensor_norms.hpp"
#include "slab/tolerances.hpp"

#ifndef SLAB_SPEC_DIR
#define SLAB_SPEC_DIR "specs"
#endif

using namespace slab;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

EstimatorOptions opts(std::uint64_t seed) {
    EstimatorOptions o;
    o.seed = seed;
    return o;
}

TensorElement random_small(CounterRng& rng, int d_max, int terms_max) {
    const Eigen::Index da = 1 + static_cast<Eigen::Index>(rng.below(d_max));
    const Eigen::Index db = 1 + static_cast<Eigen::Index>(rng.below(d_max));
    return random_tensor(da, db, 1 + rng.below(terms_max), rng);
}

TensorElement transpose_fixture(int n) {
    std::vector<TensorTerm> t;
    for (int i = 0; i < n; ++i) t.push_back({matrix_unit(n, n, i, 0), matrix_unit(n, n, 0, i)});
    return TensorElement(std::move(t));
}

const std::vector<SchattenIndex> kFourP = {SchattenIndex(1.0), SchattenIndex(2.0), SchattenIndex(4.0),
                                           SchattenIndex::infinity()};

Outcome ac1() {
    const CounterRng root(101);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        CounterRng rng = root.split(i);
        const TensorElement x = random_small(rng, 4, 4);
        const double est = schatten_op_norm(x, SchattenIndex::two(), 1, opts(i)).value;
        worst = std::max(worst, rel(est, min_norm(x)));
    }
    return {worst <= 1e-8, fmt("p=2 equals sigma_max: worst relative error %.2e over 200 (tol 1e-8)", worst)};
}

Outcome ac2() {
    const CounterRng root(102);
    const std::vector<SchattenIndex> ps = {SchattenIndex(1.0), SchattenIndex(4.0 / 3.0), SchattenIndex(4.0),
                                           SchattenIndex::infinity()};
    double worst_exact = 0.0, worst_general = 0.0;
    for (int i = 0; i < 50; ++i) {
        CounterRng rng = root.split(i);
        const TensorElement x = random_small(rng, 4, 4);
        const TensorElement xs = adjoint_tensor(x);
        for (SchattenIndex p : ps) {
            const double a = schatten_op_norm(xs, p, 1, opts(i)).value;
            const double b = schatten_op_norm(x, p.holder(), 1, opts(i)).value;
            double& w = p.is_one() || p.is_infinite() ? worst_exact : worst_general;
            w = std::max(w, rel(a, b));
        }
    }
    return {worst_exact <= 1e-8 && worst_general <= 1e-3,
            fmt("||x*||_p vs ||x||_p': worst %.2e at p in {1,inf} (tol 1e-8), %.2e at p in {4/3,4} (tol 1e-3)",
                worst_exact, worst_general)};
}

Outcome ac3() {
    const CounterRng root(103);
    double min_slack = INFINITY;
    int violations = 0;
    for (int i = 0; i < 500; ++i) {
        CounterRng rng = root.split(i);
        const TensorElement x = random_small(rng, 3, 3);
        const SchattenIndex p0 = SchattenIndex::from_inverse(rng.uniform(0.0, 1.0));
        const SchattenIndex p1 = SchattenIndex::from_inverse(rng.uniform(0.0, 1.0));
        const double theta = rng.uniform(0.01, 0.99);
        const InterpolationReport r = verify_interpolation(x, p0, p1, theta, 1, opts(i));
        min_slack = std::min(min_slack, r.slack);
        if (r.slack < -1e-9) ++violations;
    }
    return {violations == 0, fmt("interpolation: min slack %.2e over 500 triples, %d below -1e-9", min_slack, violations)};
}

Outcome ac4() {
    const CounterRng root(104);
    const std::vector<SchattenIndex> ps = {SchattenIndex(1.0), SchattenIndex(4.0 / 3.0), SchattenIndex(2.0),
                                           SchattenIndex(3.0), SchattenIndex(4.0), SchattenIndex::infinity()};
    double flip_dev = 0, unit_dev = 0, corner_dev = 0, func_slack = INFINITY;
    int violations = 0;
    for (int i = 0; i < 100; ++i) {
        CounterRng rng = root.split(i);
        const TensorElement x = random_small(rng, 4, 4);
        const SchattenIndex p = ps[rng.below(ps.size())];
        const double base = schatten_op_norm(x, p, 1, opts(i)).value;
        const double f = rel(schatten_op_norm(flip(x), p, 1, opts(i)).value, base);
        const Matrix u = random_unitary(x.dim_a(), rng), v = random_unitary(x.dim_b(), rng);
        const double un = rel(schatten_op_norm(unitary_conjugate(x, u, v), p, 1, opts(i)).value, base);
        const double co =
            rel(schatten_op_norm(corner_embed(x, 1 + rng.below(2), 1 + rng.below(2)), p, 1, opts(i)).value, base);
        const Eigen::Index ka = 1 + static_cast<Eigen::Index>(rng.below(x.dim_a()));
        const Eigen::Index kb = 1 + static_cast<Eigen::Index>(rng.below(x.dim_b()));
        const Matrix va = random_unitary(x.dim_a(), rng).leftCols(ka), wb = random_unitary(x.dim_b(), rng).leftCols(kb);
        const double fs = base - schatten_op_norm(compress(x, va, wb), p, 1, opts(i)).value;
        flip_dev = std::max(flip_dev, f);
        unit_dev = std::max(unit_dev, un);
        corner_dev = std::max(corner_dev, co);
        func_slack = std::min(func_slack, fs);
        violations += (f > kTol.flip_invariance) + (un > kTol.unitary_norm_invariance) +
                      (co > kTol.corner_invariance) + (fs < -kTol.functorial_slack);
    }
    return {violations == 0, fmt("flip %.1e (tol %.0e), unitary %.1e (tol %.0e), corner %.1e (tol %.0e), "
                                 "compression slack %.1e (tol -%.0e); %d violations over 100",
                                 flip_dev, kTol.flip_invariance, unit_dev, kTol.unitary_norm_invariance, corner_dev,
                                 kTol.corner_invariance, func_slack, kTol.functorial_slack, violations)};
}

Outcome ac5() {
    const CounterRng root(105);
    double min_mean = INFINITY, min_sym = INFINITY;
    int violations = 0;
    for (int i = 0; i < 200; ++i) {
        CounterRng rng = root.split(i);
        const TensorElement x = random_small(rng, 3, 3);
        const SandwichReport r = max_norm_sandwich(x, 1, opts(i));
        const double sym = symmetrized_norm(x, SchattenIndex::infinity(), 1, opts(i)).value;
        const double s1 = r.geometric_mean - r.min_norm, s2 = sym - r.min_norm;
        min_mean = std::min(min_mean, s1);
        min_sym = std::min(min_sym, s2);
        violations += (s1 < -1e-9) + (s2 < -1e-9);
    }
    return {violations == 0, fmt("sandwich: min slack %.2e (geometric mean), %.2e (symmetrized), %d violations over 200",
                                 min_mean, min_sym, violations)};
}

Outcome ac6() {
    const CounterRng root(106);
    double worst_gap = 0.0;
    for (int i = 0; i < 50; ++i) {
        CounterRng rng = root.split(i);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(3));
        const TensorElement x = random_tensor(d, d, 2, rng);
        HaagerupOptions ho;
        ho.seed = i;
        const double upper = haagerup_norm(x, ho).value;
        const double lower = schatten_op_norm(x, SchattenIndex::infinity(), 4, opts(i)).value;
        worst_gap = std::max(worst_gap, std::abs(upper - lower) / lower);
    }
    const TensorElement fx = transpose_fixture(3);
    const double h = haagerup_norm(fx).value;
    const double lb = schatten_op_norm(fx, SchattenIndex::infinity(), 3, opts(7)).value;
    const bool gap_ok = worst_gap <= 0.05, fixture_ok = std::abs(h - 1.0) <= 1e-6;
    return {gap_ok && fixture_ok,
            fmt("worst relative gap %.2e over 50 (tol 0.05) %s; fixture sum E_i1(x)E_1i n=3 gives %.9f, "
                "expected 1 +- 1e-6 %s (k=3 lower bound %.9f)",
                worst_gap, gap_ok ? "ok" : "FAIL", h, fixture_ok ? "ok" : "FAIL", lb)};
}

Outcome ac7() {
    const Group g = Group::free2();
    std::uint64_t pow3 = 1;
    int bad = 0;
    for (int n = 1; n <= 12; ++n) {
        const std::uint64_t sphere_expect = 4 * pow3;
        pow3 *= 3;
        const std::uint64_t ball_expect = 2 * pow3 - 1;
        bad += g.sphere_size(n) != sphere_expect;
        bad += g.ball_size(n) != ball_expect;
        bad += sphere(g, n).size() != sphere_expect;
    }
    const auto b12 = ball(g, 12);
    bad += b12.size() != 2 * pow3 - 1;
    std::vector<std::uint64_t> per_length(13, 0);
    for (const auto& w : b12) ++per_length[w.length()];
    for (int n = 1; n <= 12; ++n) bad += per_length[n] != g.sphere_size(n);
    return {bad == 0, fmt("sphere and ball counts for n,R <= 12 (closed form and enumeration): %d mismatches", bad)};
}

Outcome ac8() {
    const GroupFunction f = generator_sum(Group::free2());
    const double l1 = l1_radius(convolve(involution(f), f), 4).value;
    const GapReport g = gap_report(f, 12, 8);
    const bool ok_l1 = l1 == 16.0;
    const bool ok_window = g.reduced_squared >= 11.6 && g.reduced_squared <= 12.0;
    const bool ok_gap = g.gap >= 1.30;
    return {ok_l1 && ok_window && ok_gap,
            fmt("l1 radius %.17g (expect 16) %s; reduced norm^2 at R=12 %.6f (window [11.6, 12]) %s; gap %.4f "
                "(>= 1.30) %s",
                l1, ok_l1 ? "ok" : "FAIL", g.reduced_squared, ok_window ? "ok" : "FAIL", g.gap,
                ok_gap ? "ok" : "FAIL")};
}

Outcome ac9() {
    const Group g = Group::free2();
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0}) {
        for (int r = 0; r <= 8; ++r) {
            const GroupFunction phi = phi_t(g, t, r);
            const ProductKernel d = diagonal_lift(phi, r);
            for (SchattenIndex p : kFourP) worst = std::max(worst, rel(kernel_schatten_norm(d, p), phi.lp_norm(p)));
        }
    }
    return {worst <= 1e-12, fmt("diagonal S_p identity: worst relative error %.2e (tol 1e-12)", worst)};
}

Outcome ac10() {
    const Group g = Group::free2();
    const double tc = std::log(3.0) / 4.0;
    const ThresholdProbe conv = lp_threshold_probe(g, 4.0, 1.2 * tc, 10);
    const ThresholdProbe div = lp_threshold_probe(g, 4.0, 0.8 * tc, 10);
    double worst = 0.0;
    for (const ThresholdProbe* p : {&conv, &div}) {
        const double expect = 3.0 * std::exp(-4.0 * p->t);
        worst = std::max(worst, rel(p->ratio, expect));
        for (double r : p->increment_ratios) worst = std::max(worst, rel(r, expect));
    }
    const bool ok = conv.convergent && !div.convergent && worst <= 1e-12;
    return {ok, fmt("t=1.2 t0: %s (ratio %.6f); t=0.8 t0: %s (ratio %.6f); worst ratio error %.2e (tol 1e-12)",
                    conv.convergent ? "convergent" : "divergent", conv.ratio,
                    div.convergent ? "convergent" : "divergent", div.ratio, worst)};
}

Outcome ac11() {
    const Group g = Group::free2();
    const CounterRng root(111);
    int violations = 0;
    double min_slack = INFINITY;
    for (int i = 0; i < 100; ++i) {
        CounterRng rng = root.split(i);
        const double t = rng.uniform(0.1, 2.0);
        const ProductKernel f = random_kernel(g, 2, g, 2, 5 + rng.below(40), rng);
        const ProductKernel uf = schur_multiply(product_phi(g, t, 2, g, t, 2), f);
        for (SchattenIndex p : kFourP) {
            const double before = kernel_schatten_norm(f, p);
            const double slack = before - kernel_schatten_norm(uf, p);
            min_slack = std::min(min_slack, slack / std::max(1.0, before));
            if (slack < -1e-9 * std::max(1.0, before)) ++violations;
        }
    }
    // Stored entries agree up to rounding of exp: support must match exactly.
    bool same_support = true;
    double worst = 0.0;
    for (double s : {0.25, 0.5, 1.0}) {
        for (double t : {0.1, 0.3, 0.7}) {
            const ProductKernel lhs = schur_multiply(product_phi(g, t, 6, g, t, 6), diagonal_lift(phi_t(g, s, 6), 6));
            const ProductKernel rhs = diagonal_lift(phi_t(g, s + 2 * t, 6), 6);
            same_support = same_support && lhs.size() == rhs.size();
            for (const auto& [key, v] : rhs.support()) {
                const auto it = lhs.support().find(key);
                if (it == lhs.support().end()) {
                    same_support = false;
                    continue;
                }
                worst = std::max(worst, std::abs(it->second - v) / std::abs(v));
            }
        }
    }
    const bool ok = violations == 0 && same_support && worst <= kTol.shift_identity;
    return {ok, fmt("contraction: %d violations over 100 kernels x 4 p (min relative slack %.2e); shift identity: "
                    "support %s, worst relative entry error %.2e (tol %.0e)",
                    violations, min_slack, same_support ? "identical" : "DIFFERS", worst, kTol.shift_identity)};
}

Outcome ac12() {
    const Group g = Group::free2();
    ProductKernel f(g, 1, g, 1);
    for (int c = 0; c < g.alphabet(); ++c) f.add(Word::letter(c), Word::letter(c), 1.0);
    const CHHSequence s = chh_sequence(f, SchattenIndex::two(), 8);
    const double ref = reduced_norm_estimate(generator_sum(g), 12).value;
    bool all_above = true;
    std::string seq;
    for (const auto& e : s.entries) {
        all_above = all_above && e.value >= ref;
        seq += fmt("%s%.4f", seq.empty() ? "" : " ", e.value);
    }
    const double excess = (s.entries.back().value - ref) / ref;
    const bool ok = all_above && excess <= 0.05;
    return {ok, fmt("c_1..c_8 = %s; reference (R=12) %.6f; c_8 excess %+.2f%% (<= 5%%); every c_n >= reference: %s",
                    seq.c_str(), ref, 100.0 * excess, all_above ? "yes" : "NO")};
}

Outcome ac13() {
    const CounterRng root(113);
    double worst = 0.0;
    int growth_violations = 0;
    for (int i = 0; i < 20; ++i) {
        CounterRng rng = root.split(i);
        const GroupFunction f = random_symmetric_z(1 + static_cast<int>(rng.below(5)), rng);
        const double l1 = l1_radius(f, 64).value;
        const double m = z_reduced_norm(f).value;
        worst = std::max(worst, rel(l1, m));
        growth_violations += growth_bound_check(f, 64).violations;
    }
    return {worst <= 0.01 && growth_violations == 0,
            fmt("l1 radius vs max|f^|: worst relative difference %.2e over 20 (tol 0.01); growth violations %d", worst,
                growth_violations)};
}

Outcome ac14() {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(SLAB_SPEC_DIR))
        if (e.path().extension() == ".spec") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    int differing = 0;
    for (const auto& file : files) {
        const ExperimentSpec spec = load_spec(file);
        const std::string a = to_csv(run(spec)), b = to_csv(run(spec)), c = to_csv(run(spec, RunOptions{false}));
        differing += (a != b) + (a != c);
    }
    return {!files.empty() && differing == 0,
            fmt("%zu suite specs re-run (twice parallel, once serial): %d CSV mismatches", files.size(), differing)};
}

struct Criterion {
    int id;
    double time_limit;  // seconds, 0 for none
    std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, 10, ac1},  {2, 60, ac2},  {3, 120, ac3}, {4, 0, ac4},   {5, 0, ac5},   {6, 0, ac6},   {7, 0, ac7},
        {8, 120, ac8}, {9, 0, ac9},   {10, 0, ac10}, {11, 0, ac11}, {12, 0, ac12}, {13, 0, ac13}, {14, 0, ac14},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = fmt("%.1f s", secs);
        if (c.time_limit > 0) {
            timing += fmt(" (limit %.0f s)", c.time_limit);
            if (secs >= c.time_limit) {
                o.pass = false;
                timing += " TOO SLOW";
            }
        }
        std::printf("AC%-2d %s  %s  [%s]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
