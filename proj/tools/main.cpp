// slab: command line driver for experiment specs.
#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "slab/errors.hpp"
#include "slab/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct Outcome {
    std::optional<slab::ExperimentResult> result;
    fs::path directory;
    std::string error;
};

std::string describe(const std::exception& e) {
    if (const auto* v = dynamic_cast<const slab::ValidationError*>(&e); v && !v->key().empty()) {
        return "validation error [" + v->key() + "]: " + v->what();
    }
    if (dynamic_cast<const slab::ValidationError*>(&e)) return std::string("validation error: ") + e.what();
    return std::string("error: ") + e.what();
}

Outcome execute(const fs::path& file, std::optional<std::uint64_t> seed, const fs::path& out,
                const std::vector<slab::OutputFormat>& formats) {
    Outcome o;
    try {
        slab::ExperimentSpec spec = slab::load_spec(file);
        if (seed) spec.seed = *seed;
        o.result = slab::run(spec);
        o.directory = slab::persist(*o.result, out, formats);
    } catch (const std::exception& e) {
        o.result.reset();
        o.error = file.string() + ": " + describe(e);
    }
    return o;
}

int report(const Outcome& o, const std::vector<slab::OutputFormat>& formats) {
    if (!o.result) {
        std::cerr << o.error << "\n";
        return kExitError;
    }
    const auto& r = *o.result;
    if (std::find(formats.begin(), formats.end(), slab::OutputFormat::table) != formats.end()) {
        std::cout << slab::to_table(r);
    }
    std::cout << r.spec.name << ": " << slab::to_string(r.verdict) << " (" << r.rows.size() << " rows) -> "
              << o.directory.string() << "\n";
    return r.verdict == slab::Verdict::fail ? kExitFail : kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Run declarative Schatten-norm and free-group experiments"};
    app.require_subcommand(1);

    const char* env_root = std::getenv("SLAB_RESULTS_DIR");
    std::string out_dir = env_root && *env_root ? env_root : "results";
    std::optional<std::uint64_t> seed;
    int jobs = 0;
    std::vector<std::string> format_names;

    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "results root (default $SLAB_RESULTS_DIR or ./results)");
        cmd->add_option("--seed", seed, "override the seed of every spec");
        cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--format", format_names, "csv, json, table or plot (repeatable)")
            ->check(CLI::IsMember({"csv", "json", "table", "plot"}));
    };

    std::string spec_file;
    CLI::App* run_cmd = app.add_subcommand("run", "run one spec file");
    run_cmd->add_option("spec", spec_file, "spec file")->required();
    add_run_flags(run_cmd);

    std::string suite_dir;
    CLI::App* suite_cmd = app.add_subcommand("suite", "run every *.spec file in a directory");
    suite_cmd->add_option("dir", suite_dir, "directory of spec files")->required();
    add_run_flags(suite_cmd);

    CLI::App* kinds_cmd = app.add_subcommand("list-kinds", "list experiment kinds and their keys");

    std::string validate_file;
    CLI::App* validate_cmd = app.add_subcommand("validate", "check a spec file without running it");
    validate_cmd->add_option("spec", validate_file, "spec file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitError;
    }

    std::vector<slab::OutputFormat> formats;
    for (const auto& f : format_names) formats.push_back(slab::parse_format(f));
    if (formats.empty()) formats = {slab::OutputFormat::csv, slab::OutputFormat::json, slab::OutputFormat::plot};
    if (jobs > 0) omp_set_num_threads(jobs);

    if (*kinds_cmd) {
        for (const auto& k : slab::experiment_kinds()) {
            std::cout << k.name << ": " << k.summary << "\n";
            for (const auto& p : k.parameters) {
                std::cout << "    " << p.key << " = "
                          << (p.default_value.empty() ? std::string("<required>") : p.default_value) << "  # "
                          << p.help << "\n";
            }
        }
        return kExitPass;
    }

    if (*validate_cmd) {
        try {
            slab::validate_spec(slab::load_spec(validate_file));
        } catch (const std::exception& e) {
            std::cerr << validate_file << ": " << describe(e) << "\n";
            return kExitError;
        }
        std::cout << validate_file << ": ok\n";
        return kExitPass;
    }

    if (*run_cmd) return report(execute(spec_file, seed, out_dir, formats), formats);

    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(suite_dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".spec") files.push_back(entry.path());
    }
    if (ec) {
        std::cerr << suite_dir << ": " << ec.message() << "\n";
        return kExitError;
    }
    if (files.empty()) {
        std::cerr << suite_dir << ": no .spec files\n";
        return kExitError;
    }
    std::sort(files.begin(), files.end());

    // Specs run concurrently; module loops inside each spec then run serially.
    std::vector<Outcome> outcomes(files.size());
#pragma omp parallel for schedule(dynamic) if (files.size() > 1)
    for (std::size_t i = 0; i < files.size(); ++i) outcomes[i] = execute(files[i], seed, out_dir, formats);

    int code = kExitPass;
    for (const auto& o : outcomes) code = std::max(code, report(o, formats));
    return code;
}
