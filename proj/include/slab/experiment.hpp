#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace slab {

struct ExperimentSpec {
    std::string name;
    std::string kind;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> parameters;  // raw text values; lists are comma separated

    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

/// Flat "key = value" format, '#' starts a comment. name, kind and seed are
/// mandatory; everything else is a kind parameter. Throws ValidationError.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& file);
/// Canonical text form; parse_spec(serialize_spec(s)) == s.
std::string serialize_spec(const ExperimentSpec& spec);

struct ParameterInfo {
    std::string key;
    std::string default_value;  // empty: required
    std::string help;
};

struct KindInfo {
    std::string name;
    std::string summary;
    std::vector<ParameterInfo> parameters;
};

const std::vector<KindInfo>& experiment_kinds();
/// Checks the kind, rejects unknown keys, requires required keys, and parses
/// every value. Throws ValidationError naming the key.
void validate_spec(const ExperimentSpec& spec);

enum class Verdict { pass, fail, info };
const char* to_string(Verdict v) noexcept;
Verdict parse_verdict(const std::string& s);

struct ResultRow {
    std::string key;
    double n_or_p = 0.0;
    double value = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    Verdict verdict = Verdict::info;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<ResultRow> rows;
    Verdict verdict = Verdict::info;
    double wall_time = 0.0;
    std::string tool_version;

    friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

std::string tool_version();

struct RunOptions {
    bool parallel = true;
};

/// Runs one experiment. All randomness is drawn from streams split off the
/// spec seed. Throws ValidationError for bad specs; compute errors propagate
/// with the kind prefixed to the message.
ExperimentResult run(const ExperimentSpec& spec, const RunOptions& options = {});

inline constexpr const char* kCsvHeader = "experiment,kind,key,n_or_p,value,bound,slack,verdict";

/// %.17g numbers; the wall time is not part of the CSV.
std::string to_csv(const ExperimentResult& result);
nlohmann::json to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);
std::string to_table(const ExperimentResult& result);

struct PlotFile {
    std::string filename;
    std::string svg;
};

/// One SVG per sweep: rows are grouped by key with any trailing "_<digits>"
/// removed, x is n_or_p, and values and bounds are drawn as two series.
std::vector<PlotFile> to_plots(const ExperimentResult& result);

enum class OutputFormat { csv, json, table, plot };
OutputFormat parse_format(const std::string& s);

/// Writes results/<name>/<timestamp>/ with the spec, the requested files and a
/// manifest of SHA-256 hashes. Returns the directory.
std::filesystem::path persist(const ExperimentResult& result, const std::filesystem::path& root,
                              const std::vector<OutputFormat>& formats);

std::string sha256_hex(const std::string& bytes);

}  // namespace slab
