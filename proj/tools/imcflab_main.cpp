#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "imcflab/manifest.hpp"

using imcflab::Manifest;

int main(int argc, char** argv) {
    CLI::App app{"imcflab: p-harmonic / inverse-mean-curvature-flow numerical lab"};
    app.require_subcommand(1);

    std::string manifest_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int grid_n = 0;
    double p_max = 0.0;
    bool quiet = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--manifest", manifest_path, "JSON experiment manifest");
        sub->add_option("--out", out_dir, "output directory (overrides manifest)");
        sub->add_option("--seed", seed, "RNG seed (overrides manifest)")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--grid", grid_n, "grid node count per side (overrides manifest)");
        sub->add_option("--p-max", p_max, "largest exponent p (overrides manifest)");
        sub->add_flag("--quiet", quiet, "suppress per-assertion output");
    };

    const char* kinds[] = {"solve", "trace", "certify", "prop1", "lemma42", "theorem2"};
    for (const char* k : kinds) add_common(app.add_subcommand(k));

    std::string report_path;
    CLI::App* report_cmd = app.add_subcommand("report", "summarize an existing report.json");
    report_cmd->add_option("path", report_path, "path to report.json")->required();
    report_cmd->add_flag("--quiet", quiet);

    CLI11_PARSE(app, argc, argv);

    if (report_cmd->parsed()) return imcflab::summarize_report(report_path, quiet);

    const std::string kind = app.get_subcommands().front()->get_name();
    try {
        Manifest m;
        if (!manifest_path.empty()) {
            m = imcflab::parse_manifest_file(manifest_path);
            if (m.experiment != kind) {
                std::cerr << "manifest experiment '" << m.experiment
                          << "' does not match subcommand '" << kind << "'\n";
                return 2;
            }
        } else {
            m = imcflab::parse_manifest_text("{\"experiment\": \"" + kind + "\"}");
        }
        if (!out_dir.empty()) m.out_dir = out_dir;
        if (seed_set) m.seed = seed;
        if (grid_n > 0) m.grid_n = grid_n;
        if (p_max > 0.0) m.p_max = p_max;
        if (quiet) m.quiet = true;
        return imcflab::run_manifest(m);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
