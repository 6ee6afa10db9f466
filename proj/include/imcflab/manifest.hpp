#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imcflab/imcf_verify.hpp"

namespace imcflab {

/// Parsed and validated experiment manifest (JSON). Validation failures throw
/// std::invalid_argument with a JSON-pointer path to the offending field.
struct Manifest {
    std::string experiment;  // prop1 | lemma42 | theorem2 | certify | solve | trace
    std::string member = "linear";
    std::string target;           // certify: circle | member name | corrupted
    std::string field_file;      // optional external scalar field (solve/trace input)
    int grid_n = 65;
    bool grid_set = false;  // manifest carried an explicit grid
    double p_max = 16.0;
    std::vector<double> p_values;  // optional sweep override
    double delta = 0.05;
    double sigma = 0.5;
    double gamma = 0.5;
    bool gamma_set = false;  // manifest carried an explicit gamma
    double eps_min = 1e-5;
    double tol = 1e-9;
    int max_iters = 50;
    VerifyTolerances vtol;
    bool dump_fields = false;  // emit v/w/F CSV dumps for the largest p
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    bool quiet = false;
    // trace
    std::vector<std::pair<double, double>> trace_seeds;
    double trace_step = 0.0;     // 0 -> h/2
    double trace_max_len = 4.0;
};

Manifest parse_manifest_file(const std::string& path);
Manifest parse_manifest_text(const std::string& text);

/// Executes the experiment, writes report.json (deterministic for a fixed
/// manifest + seed), per-stage CSVs, and field dumps under out_dir. Returns
/// the process exit code: 0 iff every assertion passed. Runtime failures
/// produce a partial report flagged "aborted" and a nonzero code.
int run_manifest(const Manifest& m);

/// Renders an existing report.json as a human-readable summary; returns 0 iff
/// the report says pass.
int summarize_report(const std::string& report_path, bool quiet);

}  // namespace imcflab
