#include "slab/experiment.hpp"

#include <openssl/evp.h>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "slab/errors.hpp"
#include "slab/free_group.hpp"
#include "slab/product_kernels.hpp"
#include "slab/rng.hpp"
#include "slab/spectral_lab.hpp"
#include "slab/tensor_norms.hpp"
#include "slab/tolerances.hpp"

#ifndef SLAB_VERSION
#define SLAB_VERSION "0.0.0"
#endif

namespace slab {

namespace fs = std::filesystem;

std::string tool_version() { return std::string("slab ") + SLAB_VERSION; }

// ---------------------------------------------------------------------------
// Spec text format

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool valid_identifier(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw ValidationError(key, "expected an unsigned integer, got '" + text + "'");
    }
    try {
        return std::stoull(text);
    } catch (const std::out_of_range&) {
        throw ValidationError(key, "value out of range for a 64-bit unsigned integer");
    }
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
    ExperimentSpec spec;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (!valid_identifier(key)) throw ValidationError(key, "line " + std::to_string(lineno) + ": bad key");
        if (!seen.insert(key).second) throw ValidationError(key, "duplicate key");
        if (value.empty()) throw ValidationError(key, "empty value");
        if (key == "name") {
            if (!valid_identifier(value)) throw ValidationError(key, "name may only use letters, digits, '_', '-', '.'");
            spec.name = value;
        } else if (key == "kind") {
            spec.kind = value;
        } else if (key == "seed") {
            spec.seed = parse_u64(key, value);
        } else {
            spec.parameters[key] = value;
        }
    }
    for (const char* k : {"name", "kind", "seed"})
        if (!seen.count(k)) throw ValidationError(k, "missing required key");
    return spec;
}

ExperimentSpec load_spec(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("", "cannot read spec file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

std::string serialize_spec(const ExperimentSpec& spec) {
    std::ostringstream out;
    out << "name = " << spec.name << "\n";
    out << "kind = " << spec.kind << "\n";
    out << "seed = " << spec.seed << "\n";
    for (const auto& [k, v] : spec.parameters) out << k << " = " << v << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Kinds

const std::vector<KindInfo>& experiment_kinds() {
    static const std::vector<KindInfo> kinds = {
        {"tensor_norm",
         "S_p operator norms of Pi(x) for fixture elements",
         {{"fixture", "", "random | elementary | matrix_units"},
          {"p", "1,2,4,inf", "list of exponents"},
          {"d_a", "2", "dimension of the first factor"},
          {"d_b", "2", "dimension of the second factor"},
          {"terms", "2", "number of terms (random fixture)"},
          {"k", "1", "amplification"},
          {"restarts", "8", "random restarts per estimate"},
          {"instances", "1", "number of elements drawn"}}},
        {"interpolation_sweep",
         "||x||_p <= ||x||_p0^(1-theta) ||x||_p1^theta on random elements",
         {{"instances", "", "number of random triples"},
          {"d_max", "3", "largest factor dimension"},
          {"terms_max", "3", "largest term count"},
          {"p0", "random", "first endpoint or 'random'"},
          {"p1", "random", "second endpoint or 'random'"},
          {"theta", "random", "interpolation parameter in (0,1) or 'random'"},
          {"k", "1", "amplification"},
          {"restarts", "8", "random restarts per estimate"}}},
        {"max_sandwich",
         "min <= sqrt(||x||_inf ||x||_1) <= max(||x||_inf, ||x||_1)",
         {{"instances", "", "number of random elements"},
          {"d_max", "3", "largest factor dimension"},
          {"terms_max", "3", "largest term count"},
          {"k", "1", "amplification"},
          {"restarts", "8", "random restarts per estimate"}}},
        {"haagerup_gap",
         "optimized Haagerup upper bound against the amplified S_inf lower bound",
         {{"instances", "", "number of random elements"},
          {"d_max", "3", "largest factor dimension"},
          {"terms", "2", "term count"},
          {"k", "4", "amplification of the lower bound"},
          {"restarts", "8", "restarts for both optimizers"},
          {"gap", "0.05", "largest accepted relative gap"},
          {"fixture_n", "3", "size of the sum E_i1 (x) E_1i fixture, 0 to skip"}}},
        {"group_threshold",
         "l^p summability of phi_t on free groups: sphere growth ratio scan",
         {{"p", "", "list of exponents >= 1"},
          {"group", "F2", "F2 or Z"},
          {"t_factor", "0.8,1.2", "t as multiples of the critical ln(2r-1)/p (absolute t on Z)"},
          {"r_max", "10", "largest radius enumerated"}}},
        {"chh",
         "root sequence ||(f^* * f)^n||_{S_q}^{1/2n} of a product kernel",
         {{"fixture", "", "diagonal_generators | random"},
          {"group", "F2", "F2 or Z"},
          {"q", "2", "Schatten exponent"},
          {"n_max", "8", "largest power"},
          {"reference_radius", "10", "ball radius for the reduced-norm reference, 0 to skip"},
          {"radius", "1", "support radius (random fixture)"},
          {"terms", "4", "support size (random fixture)"}}},
        {"schur_bound",
         "Schatten contraction of phi_t x phi_t Schur multipliers and the diagonal shift identity",
         {{"instances", "", "number of random kernels"},
          {"group", "F2", "F2 or Z"},
          {"radius", "2", "truncation radius on both factors"},
          {"terms", "12", "support size of each kernel"},
          {"t", "0.7", "multiplier parameter"},
          {"p", "1,2,4,inf", "list of exponents"},
          {"t_shift", "0.5", "diagonal parameter of the shift identity"}}},
        {"spectral_gap",
         "l1 spectral radius of f^* * f against the squared reduced norm",
         {{"fixture", "", "generators | identity | random_symmetric_z"},
          {"group", "F2", "F2 or Z"},
          {"radius", "4,6,8,10", "list of ball radii"},
          {"n_max", "8", "largest power for the l1 radius"}}},
        {"z_equality",
         "l1 spectral radius against max |f^| for real symmetric f on Z",
         {{"instances", "", "number of random functions"},
          {"radius_max", "5", "largest support radius"},
          {"n_max", "64", "largest power"},
          {"tolerance", "0.01", "largest accepted relative difference"}}},
        {"growth_bound",
         "||f^n||_1 <= M^(n-1) ||f||_2 (2 n R0 + 1)^(1/2) on Z",
         {{"instances", "", "number of random functions"},
          {"fixture", "random", "random | two_point"},
          {"radius_max", "5", "largest support radius"},
          {"n_max", "64", "largest power"}}},
    };
    return kinds;
}

namespace {

const KindInfo& find_kind(const std::string& kind) {
    for (const auto& k : experiment_kinds())
        if (k.name == kind) return k;
    throw ValidationError("kind", "unknown kind '" + kind + "'");
}

double parse_number(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "inf" || s == "infinity" || s == "Inf") return std::numeric_limits<double>::infinity();
    const auto slash = s.find('/');
    try {
        std::size_t pos = 0;
        if (slash != std::string::npos) {
            const double a = std::stod(s.substr(0, slash), &pos);
            if (pos != slash) throw std::invalid_argument("");
            const std::string den = s.substr(slash + 1);
            const double b = std::stod(den, &pos);
            if (pos != den.size() || b == 0.0) throw std::invalid_argument("");
            return a / b;
        }
        const double v = std::stod(s, &pos);
        if (pos != s.size() || std::isnan(v)) throw std::invalid_argument("");
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError(key, "expected a number, got '" + s + "'");
    }
}

// Typed view of the parameters of one spec, with defaults filled in.
class Params {
public:
    Params(const ExperimentSpec& spec, const KindInfo& kind) {
        for (const auto& [k, v] : spec.parameters) {
            const bool known = std::any_of(kind.parameters.begin(), kind.parameters.end(),
                                           [&](const ParameterInfo& p) { return p.key == k; });
            if (!known) throw ValidationError(k, "unknown key for kind " + kind.name);
        }
        for (const auto& p : kind.parameters) {
            auto it = spec.parameters.find(p.key);
            if (it != spec.parameters.end()) {
                values_[p.key] = it->second;
            } else if (p.default_value.empty()) {
                throw ValidationError(p.key, "required for kind " + kind.name);
            } else {
                values_[p.key] = p.default_value;
            }
        }
    }

    const std::string& text(const std::string& key) const { return values_.at(key); }

    std::string choice(const std::string& key, std::initializer_list<const char*> allowed) const {
        const std::string& v = text(key);
        for (const char* a : allowed)
            if (v == a) return v;
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        throw ValidationError(key, "expected one of " + list + ", got '" + v + "'");
    }

    double number(const std::string& key) const { return parse_number(key, text(key)); }

    int integer(const std::string& key, int lo, int hi) const {
        const double v = number(key);
        if (v != std::floor(v) || v < lo || v > hi) {
            throw ValidationError(key, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                           "], got '" + text(key) + "'");
        }
        return static_cast<int>(v);
    }

    double positive(const std::string& key) const {
        const double v = number(key);
        if (!(v > 0.0) || std::isinf(v)) throw ValidationError(key, "expected a finite positive number");
        return v;
    }

    std::vector<double> list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(text(key));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
        if (out.empty()) throw ValidationError(key, "empty list");
        return out;
    }

    std::vector<SchattenIndex> exponents(const std::string& key) const {
        std::vector<SchattenIndex> out;
        for (double p : list(key)) {
            if (!(p >= 1.0)) throw ValidationError(key, "Schatten exponents must be >= 1");
            out.emplace_back(p);
        }
        return out;
    }

    std::optional<double> number_or_random(const std::string& key) const {
        if (text(key) == "random") return std::nullopt;
        return number(key);
    }

    Group group(const std::string& key) const {
        try {
            return Group::parse(text(key));
        } catch (const DomainError& e) {
            throw ValidationError(key, e.what());
        }
    }

private:
    std::map<std::string, std::string> values_;
};

// Parses every parameter the runner will read, so that validation and run
// reject exactly the same specs.
void check_values(const std::string& kind, const Params& p) {
    if (kind == "tensor_norm") {
        p.choice("fixture", {"random", "elementary", "matrix_units"});
        p.exponents("p");
        p.integer("d_a", 1, 8);
        p.integer("d_b", 1, 8);
        p.integer("terms", 1, 16);
        p.integer("k", 1, 8);
        p.integer("restarts", 1, 256);
        p.integer("instances", 1, 100000);
    } else if (kind == "interpolation_sweep") {
        p.integer("instances", 1, 100000);
        p.integer("d_max", 1, 6);
        p.integer("terms_max", 1, 8);
        for (const char* k : {"p0", "p1"}) {
            if (auto v = p.number_or_random(k); v && !(*v >= 1.0)) throw ValidationError(k, "exponent must be >= 1");
        }
        if (auto v = p.number_or_random("theta"); v && !(*v > 0.0 && *v < 1.0)) {
            throw ValidationError("theta", "must lie in (0, 1)");
        }
        p.integer("k", 1, 8);
        p.integer("restarts", 1, 256);
    } else if (kind == "max_sandwich") {
        p.integer("instances", 1, 100000);
        p.integer("d_max", 1, 6);
        p.integer("terms_max", 1, 8);
        p.integer("k", 1, 8);
        p.integer("restarts", 1, 256);
    } else if (kind == "haagerup_gap") {
        p.integer("instances", 1, 100000);
        p.integer("d_max", 1, 5);
        p.integer("terms", 1, 6);
        p.integer("k", 1, 6);
        p.integer("restarts", 1, 256);
        p.positive("gap");
        p.integer("fixture_n", 0, 6);
    } else if (kind == "group_threshold") {
        for (double v : p.list("p"))
            if (!(v >= 1.0) || std::isinf(v)) throw ValidationError("p", "exponents must lie in [1, inf)");
        p.group("group");
        for (double v : p.list("t_factor"))
            if (!(v > 0.0) || std::isinf(v)) throw ValidationError("t_factor", "must be finite and positive");
        p.integer("r_max", 2, 14);
    } else if (kind == "chh") {
        p.choice("fixture", {"diagonal_generators", "random"});
        p.group("group");
        if (!(p.number("q") >= 1.0)) throw ValidationError("q", "must be >= 1");
        p.integer("n_max", 1, 64);
        p.integer("reference_radius", 0, 13);
        p.integer("radius", 0, 4);
        p.integer("terms", 1, 64);
    } else if (kind == "schur_bound") {
        p.integer("instances", 1, 100000);
        p.group("group");
        p.integer("radius", 0, 4);
        p.integer("terms", 1, 10000);
        p.positive("t");
        p.exponents("p");
        p.positive("t_shift");
    } else if (kind == "spectral_gap") {
        p.choice("fixture", {"generators", "identity", "random_symmetric_z"});
        p.group("group");
        for (double r : p.list("radius"))
            if (r != std::floor(r) || r < 0 || r > 13) throw ValidationError("radius", "radii must be integers in [0, 13]");
        p.integer("n_max", 1, 256);
    } else if (kind == "z_equality") {
        p.integer("instances", 1, 100000);
        p.integer("radius_max", 1, 32);
        p.integer("n_max", 1, 512);
        p.positive("tolerance");
    } else if (kind == "growth_bound") {
        p.integer("instances", 1, 100000);
        p.choice("fixture", {"random", "two_point"});
        p.integer("radius_max", 1, 32);
        p.integer("n_max", 1, 512);
    }
}

}  // namespace

void validate_spec(const ExperimentSpec& spec) {
    if (!valid_identifier(spec.name)) throw ValidationError("name", "name may only use letters, digits, '_', '-', '.'");
    const KindInfo& kind = find_kind(spec.kind);
    const Params params(spec, kind);
    check_values(spec.kind, params);
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::info: return "info";
    }
    return "info";
}

Verdict parse_verdict(const std::string& s) {
    if (s == "pass") return Verdict::pass;
    if (s == "fail") return Verdict::fail;
    if (s == "info") return Verdict::info;
    throw DomainError("unknown verdict '" + s + "'");
}

// ---------------------------------------------------------------------------
// Running

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Rows {
    std::vector<ResultRow> rows;

    void info(std::string key, double x, double value, double bound = kNaN, double slack = kNaN) {
        rows.push_back({std::move(key), x, value, bound, slack, Verdict::info});
    }
    // Passes when slack >= -tolerance.
    void check(std::string key, double x, double value, double bound, double slack, double tolerance) {
        rows.push_back({std::move(key), x, value, bound, slack, slack >= -tolerance ? Verdict::pass : Verdict::fail});
    }
};

std::string indexed(const std::string& base, std::size_t i) { return base + "_" + std::to_string(i); }

std::string fmt_compact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

EstimatorOptions estimator(const Params& p, std::uint64_t seed, std::size_t instance, bool parallel) {
    EstimatorOptions o;
    o.restarts = p.integer("restarts", 1, 256);
    o.seed = mix64(seed ^ mix64(instance + 1));
    o.parallel = parallel;
    return o;
}

double exponent_value(SchattenIndex p) { return p.p(); }

TensorElement transpose_map_fixture(int n) {
    std::vector<TensorTerm> t;
    for (int i = 0; i < n; ++i) t.push_back({matrix_unit(n, n, i, 0), matrix_unit(n, n, 0, i)});
    return TensorElement(std::move(t));
}

void run_tensor_norm(const ExperimentSpec& spec, const Params& p, const RunOptions& ro, Rows& out) {
    const std::string fixture = p.text("fixture");
    const int da = p.integer("d_a", 1, 8), db = p.integer("d_b", 1, 8);
    const int k = p.integer("k", 1, 8);
    const int instances = p.integer("instances", 1, 100000);
    const CounterRng root(spec.seed);
    for (int i = 0; i < instances; ++i) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(i));
        const EstimatorOptions o = estimator(p, spec.seed, static_cast<std::size_t>(i), ro.parallel);
        if (fixture == "elementary") {
            const TensorElement x(random_gaussian(da, da, rng), Matrix::Identity(db, db));
            const double expect = operator_norm(x.terms()[0].a);
            for (SchattenIndex q : p.exponents("p")) {
                const double v = schatten_op_norm(x, q, k, o).value;
                const bool sharp = q.is_one() || q.is_two() || q.is_infinite();
                const double tol = sharp ? kTol.cross_norm_exact : kTol.cross_norm_general;
                out.check(indexed("instance", static_cast<std::size_t>(i)), exponent_value(q), v, expect,
                          -std::abs(v - expect) / expect, tol);
            }
        } else {
            const TensorElement x = fixture == "random"
                                        ? random_tensor(da, db, static_cast<std::size_t>(p.integer("terms", 1, 16)), rng)
                                        : transpose_map_fixture(da);
            const double mn = min_norm(x);
            for (SchattenIndex q : p.exponents("p")) {
                const double v = schatten_op_norm(x, q, k, o).value;
                const std::string key = indexed("instance", static_cast<std::size_t>(i));
                if (q.is_two()) {
                    out.check(key, 2.0, v, mn, -std::abs(v - mn) / std::max(mn, 1e-300), kTol.p2_identification);
                } else {
                    out.info(key, exponent_value(q), v, mn, v - mn);
                }
            }
        }
    }
}

struct RandomShape {
    Eigen::Index da, db;
    std::size_t terms;
};

RandomShape draw_shape(CounterRng& rng, int d_max, int terms_max) {
    return {static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(d_max))),
            static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(d_max))),
            static_cast<std::size_t>(1 + rng.below(static_cast<std::uint64_t>(terms_max)))};
}

void run_interpolation(const ExperimentSpec& spec, const Params& p, const RunOptions& ro, Rows& out) {
    const int instances = p.integer("instances", 1, 100000);
    const int d_max = p.integer("d_max", 1, 6), terms_max = p.integer("terms_max", 1, 8);
    const int k = p.integer("k", 1, 8);
    const auto fixed_p0 = p.number_or_random("p0"), fixed_p1 = p.number_or_random("p1");
    const auto fixed_theta = p.number_or_random("theta");
    const CounterRng root(spec.seed);
    for (int i = 0; i < instances; ++i) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(i));
        const RandomShape s = draw_shape(rng, d_max, terms_max);
        const TensorElement x = random_tensor(s.da, s.db, s.terms, rng);
        const SchattenIndex p0 = fixed_p0 ? SchattenIndex(*fixed_p0) : SchattenIndex::from_inverse(rng.uniform(0.0, 1.0));
        const SchattenIndex p1 = fixed_p1 ? SchattenIndex(*fixed_p1) : SchattenIndex::from_inverse(rng.uniform(0.0, 1.0));
        const double theta = fixed_theta ? *fixed_theta : rng.uniform(0.05, 0.95);
        const InterpolationReport r =
            verify_interpolation(x, p0, p1, theta, k, estimator(p, spec.seed, static_cast<std::size_t>(i), ro.parallel));
        out.check(indexed("instance", static_cast<std::size_t>(i)), r.p.p(), r.at_p.value, r.rhs, r.slack,
                  kTol.interpolation_slack);
    }
}

void run_sandwich(const ExperimentSpec& spec, const Params& p, const RunOptions& ro, Rows& out) {
    const int instances = p.integer("instances", 1, 100000);
    const int d_max = p.integer("d_max", 1, 6), terms_max = p.integer("terms_max", 1, 8);
    const int k = p.integer("k", 1, 8);
    const CounterRng root(spec.seed);
    for (int i = 0; i < instances; ++i) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(i));
        const RandomShape s = draw_shape(rng, d_max, terms_max);
        const TensorElement x = random_tensor(s.da, s.db, s.terms, rng);
        const SandwichReport r = max_norm_sandwich(x, k, estimator(p, spec.seed, static_cast<std::size_t>(i), ro.parallel));
        const auto n = static_cast<double>(i);
        out.check(indexed("mean", static_cast<std::size_t>(i)), n, r.min_norm, r.geometric_mean, r.slack_mean,
                  kTol.sandwich_slack);
        out.check(indexed("symmetrized", static_cast<std::size_t>(i)), n, r.geometric_mean, r.symmetrized,
                  r.symmetrized - r.geometric_mean, kTol.sandwich_slack);
    }
}

void run_haagerup(const ExperimentSpec& spec, const Params& p, const RunOptions& ro, Rows& out) {
    const int instances = p.integer("instances", 1, 100000);
    const int d_max = p.integer("d_max", 1, 5);
    const auto terms = static_cast<std::size_t>(p.integer("terms", 1, 6));
    const int k = p.integer("k", 1, 6);
    const double gap = p.positive("gap");
    const int restarts = p.integer("restarts", 1, 256);
    const CounterRng root(spec.seed);
    for (int i = 0; i < instances; ++i) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(i));
        const RandomShape s = draw_shape(rng, d_max, 1);
        const TensorElement x = random_tensor(s.da, s.db, terms, rng);
        HaagerupOptions ho;
        ho.restarts = restarts;
        ho.seed = mix64(spec.seed ^ mix64(static_cast<std::uint64_t>(i) + 1));
        const double upper = haagerup_norm(x, ho).value;
        const double lower =
            schatten_op_norm(x, SchattenIndex::infinity(), k, estimator(p, spec.seed, static_cast<std::size_t>(i), ro.parallel))
                .value;
        const double rel = (upper - lower) / lower;
        const auto n = static_cast<double>(i);
        out.check(indexed("order", static_cast<std::size_t>(i)), n, lower, upper, upper - lower,
                  kTol.estimate_order_slack * std::max(1.0, upper));
        out.check(indexed("gap", static_cast<std::size_t>(i)), n, rel, gap, gap - rel, 0.0);
    }
    const int fn = p.integer("fixture_n", 0, 6);
    if (fn > 0) {
        const TensorElement x = transpose_map_fixture(fn);
        const double upper = haagerup_norm(x).value;
        const auto ladder = amplification_ladder(x, SchattenIndex::infinity(), k,
                                                 estimator(p, spec.seed, static_cast<std::size_t>(instances), ro.parallel));
        for (std::size_t j = 0; j < ladder.size(); ++j) {
            out.check("fixture_ladder", static_cast<double>(j + 1), ladder[j].value, upper, upper - ladder[j].value,
                      kTol.estimate_order_slack * std::max(1.0, upper));
        }
    }
}

void run_threshold(const ExperimentSpec&, const Params& p, const RunOptions&, Rows& out) {
    const Group g = p.group("group");
    const int r_max = p.integer("r_max", 2, 14);
    std::size_t combo = 0;
    for (double pe : p.list("p")) {
        for (double factor : p.list("t_factor")) {
            const double branch = static_cast<double>(g.alphabet() - 1);
            const double t = g.rank() == 1 ? factor : factor * std::log(branch) / pe;
            const ThresholdProbe probe = lp_threshold_probe(g, pe, t, r_max);
            double worst = 0.0;
            for (double r : probe.increment_ratios) worst = std::max(worst, std::abs(r - probe.ratio) / probe.ratio);
            out.info(indexed("ratio", combo), t, probe.ratio, 1.0, 1.0 - probe.ratio);
            out.check(indexed("ratio_match", combo), t, worst, kTol.threshold_ratio, kTol.threshold_ratio - worst, 0.0);
            const std::string series = "partial_p" + fmt_compact(pe) + "_t" + fmt_compact(factor);
            for (std::size_t r = 0; r < probe.partial_sums.size(); ++r)
                out.info(series, static_cast<double>(r), probe.partial_sums[r]);
            ++combo;
        }
    }
}

void run_chh(const ExperimentSpec& spec, const Params& p, const RunOptions&, Rows& out) {
    const Group g = p.group("group");
    const SchattenIndex q(p.number("q"));
    const int n_max = p.integer("n_max", 1, 64);
    const int ref_radius = p.integer("reference_radius", 0, 13);
    ProductKernel f(g, 1, g, 1);
    GroupFunction diag(g);
    const bool generators = p.text("fixture") == "diagonal_generators";
    if (generators) {
        for (int c = 0; c < g.alphabet(); ++c) f.add(Word::letter(c), Word::letter(c), 1.0);
        diag = generator_sum(g);
    } else {
        const int radius = p.integer("radius", 0, 4);
        CounterRng rng(spec.seed);
        f = random_kernel(g, radius, g, radius, static_cast<std::size_t>(p.integer("terms", 1, 64)), rng);
    }
    double reference = kNaN;
    if (generators && ref_radius > 0) reference = reduced_norm_estimate(diag, ref_radius).value;
    const CHHSequence seq = chh_sequence(f, q, n_max, kTol.support_cap);
    for (const auto& e : seq.entries)
        out.info("c", static_cast<double>(e.n), e.value, reference, std::isnan(reference) ? kNaN : e.value - reference);
}

void run_schur(const ExperimentSpec& spec, const Params& p, const RunOptions&, Rows& out) {
    const Group g = p.group("group");
    const int radius = p.integer("radius", 0, 4);
    const int instances = p.integer("instances", 1, 100000);
    const auto terms = static_cast<std::size_t>(p.integer("terms", 1, 10000));
    const double t = p.positive("t");
    const auto exps = p.exponents("p");
    const ProductKernel u = product_phi(g, t, radius, g, t, radius);
    const CounterRng root(spec.seed);
    for (int i = 0; i < instances; ++i) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(i));
        const ProductKernel f = random_kernel(g, radius, g, radius, terms, rng);
        const ProductKernel uf = schur_multiply(u, f);
        for (SchattenIndex q : exps) {
            const double before = kernel_schatten_norm(f, q), after = kernel_schatten_norm(uf, q);
            out.check(indexed("contraction", static_cast<std::size_t>(i)), q.p(), after, before, before - after,
                      kTol.schur_slack * std::max(1.0, before));
        }
    }
    // phi~_s (phi_t x phi_t) against phi~_{s+2t} on the stored diagonal.
    const double s = p.positive("t_shift");
    const ProductKernel lhs = schur_multiply(u, diagonal_lift(phi_t(g, s, radius), radius));
    const ProductKernel rhs = diagonal_lift(phi_t(g, s + 2.0 * t, radius), radius);
    double worst = 0.0;
    bool same_support = lhs.size() == rhs.size();
    for (const auto& [key, v] : rhs.support()) {
        auto it = lhs.support().find(key);
        if (it == lhs.support().end()) {
            same_support = false;
            continue;
        }
        worst = std::max(worst, std::abs(it->second - v) / std::abs(v));
    }
    out.check("shift_identity", s, worst, kTol.shift_identity, same_support ? kTol.shift_identity - worst : -1.0, 0.0);
}

GroupFunction gap_fixture(const Params& p, std::uint64_t seed) {
    const std::string fixture = p.text("fixture");
    if (fixture == "random_symmetric_z") {
        CounterRng rng(seed);
        return random_symmetric_z(3, rng);
    }
    const Group g = p.group("group");
    if (fixture == "identity") return GroupFunction::delta(g, Word{});
    return generator_sum(g);
}

void run_spectral_gap(const ExperimentSpec& spec, const Params& p, const RunOptions&, Rows& out) {
    const GroupFunction f = gap_fixture(p, spec.seed);
    const int n_max = p.integer("n_max", 1, 256);
    for (double r : p.list("radius")) {
        const int radius = std::max(static_cast<int>(r), f.radius());
        const GapReport g = gap_report(f, radius, n_max);
        const auto x = static_cast<double>(radius);
        out.info("l1_radius", x, g.l1_radius);
        out.info("reduced_squared", x, g.reduced_squared);
        out.info("gap", x, g.gap, 1.0, g.gap - 1.0);
    }
}

void run_z_equality(const ExperimentSpec& spec, const Params& p, const RunOptions&, Rows& out) {
    const int instances = p.integer("instances", 1, 100000);
    const int rmax = p.integer("radius_max", 1, 32), n_max = p.integer("n_max", 1, 512);
    const double tol = p.positive("tolerance");
    const CounterRng root(spec.seed);
    for (int i = 0; i < instances; ++i) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(i));
        const GroupFunction f = random_symmetric_z(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(rmax))), rng);
        const double l1 = l1_radius(f, n_max).value;
        const double m = z_reduced_norm(f).value;
        const double rel = std::abs(l1 - m) / m;
        out.check(indexed("equality", static_cast<std::size_t>(i)), static_cast<double>(i), l1, m, tol - rel, 0.0);
    }
}

void run_growth(const ExperimentSpec& spec, const Params& p, const RunOptions&, Rows& out) {
    const int instances = p.integer("instances", 1, 100000);
    const int rmax = p.integer("radius_max", 1, 32), n_max = p.integer("n_max", 1, 512);
    const bool two_point = p.text("fixture") == "two_point";
    const CounterRng root(spec.seed);
    for (int i = 0; i < instances; ++i) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(i));
        GroupFunction f(Group::integers());
        if (two_point) {
            f.add(Word::integer(1), 1.0);
            f.add(Word::integer(-1), 1.0);
        } else {
            f = random_symmetric_z(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(rmax))), rng);
        }
        const GrowthReport g = growth_bound_check(f, n_max);
        for (const auto& row : g.rows) {
            out.check(indexed("growth", static_cast<std::size_t>(i)), static_cast<double>(row.n), row.lhs, row.rhs,
                      row.slack, kTol.growth_slack * std::max(1.0, row.rhs));
        }
    }
}

using Runner = std::function<void(const ExperimentSpec&, const Params&, const RunOptions&, Rows&)>;

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> r = {
        {"tensor_norm", run_tensor_norm},   {"interpolation_sweep", run_interpolation},
        {"max_sandwich", run_sandwich},     {"haagerup_gap", run_haagerup},
        {"group_threshold", run_threshold}, {"chh", run_chh},
        {"schur_bound", run_schur},         {"spectral_gap", run_spectral_gap},
        {"z_equality", run_z_equality},     {"growth_bound", run_growth},
    };
    return r;
}

}  // namespace

ExperimentResult run(const ExperimentSpec& spec, const RunOptions& options) {
    validate_spec(spec);
    const KindInfo& kind = find_kind(spec.kind);
    const Params params(spec, kind);
    ExperimentResult result;
    result.spec = spec;
    result.tool_version = tool_version();
    const auto t0 = std::chrono::steady_clock::now();
    Rows rows;
    try {
        runners().at(spec.kind)(spec, params, options, rows);
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(spec.kind + ": " + e.what());
    }
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.rows = std::move(rows.rows);
    result.verdict = Verdict::info;
    for (const auto& r : result.rows) {
        if (r.verdict == Verdict::fail) {
            result.verdict = Verdict::fail;
            break;
        }
        if (r.verdict == Verdict::pass) result.verdict = Verdict::pass;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json number_json(double v) {
    if (std::isfinite(v)) return v;
    return fmt17(v);
}

double json_number(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "nan") return kNaN;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw DomainError("bad number in result JSON: " + s);
}

}  // namespace

std::string to_csv(const ExperimentResult& result) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : result.rows) {
        out += result.spec.name + "," + result.spec.kind + "," + r.key + "," + fmt17(r.n_or_p) + "," + fmt17(r.value) +
               "," + fmt17(r.bound) + "," + fmt17(r.slack) + "," + to_string(r.verdict) + "\n";
    }
    return out;
}

nlohmann::json to_json(const ExperimentResult& result) {
    nlohmann::json j;
    j["spec"] = {{"name", result.spec.name},
                 {"kind", result.spec.kind},
                 {"seed", result.spec.seed},
                 {"parameters", result.spec.parameters}};
    j["rows"] = nlohmann::json::array();
    for (const auto& r : result.rows) {
        j["rows"].push_back({{"key", r.key},
                             {"n_or_p", number_json(r.n_or_p)},
                             {"value", number_json(r.value)},
                             {"bound", number_json(r.bound)},
                             {"slack", number_json(r.slack)},
                             {"verdict", to_string(r.verdict)}});
    }
    j["verdict"] = to_string(result.verdict);
    j["wall_time"] = result.wall_time;
    j["tool_version"] = result.tool_version;
    return j;
}

ExperimentResult result_from_json(const nlohmann::json& j) {
    ExperimentResult r;
    const auto& s = j.at("spec");
    r.spec.name = s.at("name").get<std::string>();
    r.spec.kind = s.at("kind").get<std::string>();
    r.spec.seed = s.at("seed").get<std::uint64_t>();
    r.spec.parameters = s.at("parameters").get<std::map<std::string, std::string>>();
    for (const auto& row : j.at("rows")) {
        r.rows.push_back({row.at("key").get<std::string>(), json_number(row.at("n_or_p")), json_number(row.at("value")),
                          json_number(row.at("bound")), json_number(row.at("slack")),
                          parse_verdict(row.at("verdict").get<std::string>())});
    }
    r.verdict = parse_verdict(j.at("verdict").get<std::string>());
    r.wall_time = j.at("wall_time").get<double>();
    r.tool_version = j.at("tool_version").get<std::string>();
    return r;
}

std::string to_table(const ExperimentResult& result) {
    std::ostringstream out;
    out << result.spec.name << " (" << result.spec.kind << ", seed " << result.spec.seed << "): "
        << to_string(result.verdict) << ", " << result.rows.size() << " rows, " << std::fixed << std::setprecision(2)
        << result.wall_time << " s\n";
    std::size_t wkey = 3;
    for (const auto& r : result.rows) wkey = std::max(wkey, r.key.size());
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%14.8g", v);
        return std::string(buf);
    };
    out << std::left << std::setw(static_cast<int>(wkey)) << "key" << "  " << std::right << std::setw(14) << "n_or_p"
        << std::setw(14) << "value" << std::setw(14) << "bound" << std::setw(14) << "slack" << "  verdict\n";
    for (const auto& r : result.rows) {
        out << std::left << std::setw(static_cast<int>(wkey)) << r.key << "  " << num(r.n_or_p) << num(r.value)
            << num(r.bound) << num(r.slack) << "  " << to_string(r.verdict) << "\n";
    }
    return out.str();
}

namespace {

std::string family_of(const std::string& key) {
    const auto us = key.rfind('_');
    if (us == std::string::npos || us + 1 == key.size()) return key;
    const bool digits = std::all_of(key.begin() + static_cast<std::ptrdiff_t>(us) + 1, key.end(),
                                    [](unsigned char c) { return std::isdigit(c); });
    return digits ? key.substr(0, us) : key;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string svg_plot(const std::string& title, const std::vector<const ResultRow*>& rows) {
    constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    std::vector<std::pair<double, double>> values, bounds;
    for (const ResultRow* r : rows) {
        if (!std::isfinite(r->n_or_p)) continue;
        if (std::isfinite(r->value)) values.push_back({r->n_or_p, r->value});
        if (std::isfinite(r->bound)) bounds.push_back({r->n_or_p, r->bound});
    }
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto* series : {&values, &bounds})
        for (const auto& [x, y] : *series) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    const bool log_y = ymin > 0.0 && ymax / ymin > 1e3;
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    double y0 = ty(ymin), y1 = ty(ymax);
    if (!(xmax > xmin)) {
        xmin -= 1;
        xmax += 1;
    }
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream s;
    s << std::setprecision(6);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << " " << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yt = y0 + (y1 - y0) * i / 4.0;
        const double yv = log_y ? std::pow(10.0, yt) : yt;
        s << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_compact(xv) << "</text>\n";
        s << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_compact(yv) << "</text>\n";
    }
    s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">n_or_p</text>\n";
    for (const auto& [x, y] : values)
        s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
    for (const auto& [x, y] : bounds) {
        const double cx = px(x), cy = py(y);
        s << "<path d=\"M" << cx - 3 << " " << cy - 3 << " L" << cx + 3 << " " << cy + 3 << " M" << cx - 3 << " "
          << cy + 3 << " L" << cx + 3 << " " << cy - 3 << "\" stroke=\"#c0392b\"/>\n";
    }
    s << "<circle cx=\"" << W - 150 << "\" cy=\"" << T << "\" r=\"3\" fill=\"#1f5fa8\"/>"
      << "<text x=\"" << W - 142 << "\" y=\"" << T + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">value</text>\n";
    s << "<path d=\"M" << W - 83 << " " << T - 3 << " L" << W - 77 << " " << T + 3 << " M" << W - 83 << " " << T + 3
      << " L" << W - 77 << " " << T - 3 << "\" stroke=\"#c0392b\"/>"
      << "<text x=\"" << W - 72 << "\" y=\"" << T + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">bound</text>\n";
    if (log_y)
        s << "<text x=\"" << L << "\" y=\"" << T - 8 << "\" font-family=\"sans-serif\" font-size=\"11\">log scale</text>\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace

std::vector<PlotFile> to_plots(const ExperimentResult& result) {
    std::map<std::string, std::vector<const ResultRow*>> families;
    std::vector<std::string> order;
    for (const auto& r : result.rows) {
        const std::string f = family_of(r.key);
        if (!families.count(f)) order.push_back(f);
        families[f].push_back(&r);
    }
    std::vector<PlotFile> out;
    for (const auto& f : order) {
        if (families[f].size() < 2) continue;
        out.push_back({"plot_" + f + ".svg", svg_plot(result.spec.name + ": " + f, families[f])});
    }
    return out;
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    if (s == "table") return OutputFormat::table;
    if (s == "plot") return OutputFormat::plot;
    throw ValidationError("--format", "expected csv, json, table or plot, got '" + s + "'");
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return out.str();
}

namespace {

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << bytes;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

fs::path persist(const ExperimentResult& result, const fs::path& root, const std::vector<OutputFormat>& formats) {
    const fs::path base = root / result.spec.name;
    std::error_code ec;
    fs::create_directories(base, ec);
    if (ec) throw std::runtime_error("cannot create " + base.string() + ": " + ec.message());
    const std::string stamp = utc_stamp();
    fs::path dir = base / stamp;
    for (int i = 2; !fs::create_directory(dir, ec); ++i) {
        if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
        dir = base / (stamp + "-" + std::to_string(i));
    }

    std::map<std::string, std::string> files;
    files["spec.txt"] = serialize_spec(result.spec);
    auto wants = [&](OutputFormat f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
    if (wants(OutputFormat::csv)) files["results.csv"] = to_csv(result);
    if (wants(OutputFormat::json)) files["result.json"] = to_json(result).dump(2) + "\n";
    if (wants(OutputFormat::table)) files["table.txt"] = to_table(result);
    if (wants(OutputFormat::plot))
        for (auto& p : to_plots(result)) files[p.filename] = std::move(p.svg);

    std::string manifest = "tool_version: " + result.tool_version + "\n";
    for (const auto& [name, bytes] : files) {
        write_file(dir / name, bytes);
        manifest += sha256_hex(bytes) + "  " + name + "\n";
    }
    write_file(dir / "manifest.txt", manifest);
    return dir;
}

}  // namespace slab
