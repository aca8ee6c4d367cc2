// collapse_lab: runs the electron, photon and retrodiction experiments under
// unitary (Everett) and projective-collapse (Copenhagen) dynamics and emits
// machine-readable reports.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "collapse/collapse.hpp"

namespace {

// "0:pi:16" -> 16 evenly spaced points from 0 to pi inclusive. Endpoint
// tokens are plain numbers, "pi", or "<number>pi" (e.g. "0.5pi", "2pi").
std::vector<double> parse_phase_grid(const std::string& text) {
    auto parse_angle = [](const std::string& tok) {
        if (tok.empty()) throw std::invalid_argument("empty phase token");
        if (tok == "pi") return M_PI;
        if (tok.size() > 2 && tok.substr(tok.size() - 2) == "pi") {
            std::size_t used = 0;
            double v = std::stod(tok.substr(0, tok.size() - 2), &used);
            if (used != tok.size() - 2)
                throw std::invalid_argument("bad phase token '" + tok + "'");
            return v * M_PI;
        }
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size())
            throw std::invalid_argument("bad phase token '" + tok + "'");
        return v;
    };

    std::size_t a = text.find(':');
    std::size_t b = text.rfind(':');
    if (a == std::string::npos || b == a)
        throw std::invalid_argument(
            "phase grid must be start:stop:count, e.g. 0:pi:16");
    double start = parse_angle(text.substr(0, a));
    double stop = parse_angle(text.substr(a + 1, b - a - 1));
    long count = std::stol(text.substr(b + 1));
    if (count < 1)
        throw std::invalid_argument("phase grid count must be >= 1");

    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
        grid.push_back(start);
        return grid;
    }
    double step = (stop - start) / static_cast<double>(count - 1);
    for (long i = 0; i < count; ++i)
        grid.push_back(start + step * static_cast<double>(i));
    return grid;
}

std::uint64_t env_default_seed() {
    if (const char* env = std::getenv("COLLAPSE_LAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument(
                "COLLAPSE_LAB_SEED must be an unsigned integer");
        }
    }
    return collapse::kDefaultSeed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "collapse_lab: quantum measurement thought experiments under unitary "
        "and projective-collapse dynamics"};
    app.require_subcommand(1);

    collapse::RunConfig cfg;
    std::string initial = "+z";
    std::string interpretation = "both";
    std::string branch = "M++";
    std::string format = "json";
    std::string phase_grid;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd, bool with_samples) {
        cmd->add_option("--output", format, "Output format: json, csv or table")
            ->check(CLI::IsMember({"json", "csv", "table"}));
        cmd->add_option("--output-path", cfg.output_path,
                        "Write the report to this file instead of stdout");
        if (with_samples)
            cmd->add_option("--samples", cfg.samples,
                            "Monte Carlo samples (0 = exact ensemble only)")
                ->check(CLI::NonNegativeNumber);
        cmd->add_option("--seed", cfg.seed,
                        "RNG seed (default: COLLAPSE_LAB_SEED or the built-in "
                        "constant)")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* electron = app.add_subcommand(
        "electron", "Measure-and-flip x-spin measurement on one electron");
    electron->add_option("--initial", initial,
                         "Electron state: +z, -z, +x or -x (use --initial=-z "
                         "for the minus states)")
        ->check(CLI::IsMember({"+z", "-z", "+x", "-x"}));
    electron->add_option("--j0", cfg.j0, "Baseline observer <J_z> (default 0)");
    electron->add_option("--interpretation", interpretation,
                         "everett, copenhagen or both")
        ->check(CLI::IsMember({"everett", "copenhagen", "both"}));
    add_common(electron, true);

    CLI::App* photons = app.add_subcommand(
        "photons", "Horizontal-count measurement on N right-circular photons");
    photons->add_option("--n", cfg.n_photons, "Photon count N")
        ->required()
        ->check(CLI::Range(std::int64_t{1}, collapse::kFastMaxPhotons));
    photons->add_option("--nb", cfg.n_b, "Baseline observer spin (default 0)");
    photons->add_option("--interpretation", interpretation,
                        "everett, copenhagen or both")
        ->check(CLI::IsMember({"everett", "copenhagen", "both"}));
    add_common(photons, true);

    CLI::App* retrodict = app.add_subcommand(
        "retrodict",
        "Retrospective Born rule from an observed post-measurement branch");
    retrodict->add_option("--branch", branch, "Observed branch: M++ or M+-")
        ->check(CLI::IsMember({"M++", "M+-", "M_++", "M_+-"}));
    retrodict->add_option(
        "--phase-grid", phase_grid,
        "Sweep the relative branch phase: start:stop:count (e.g. 0:pi:16)");
    add_common(retrodict, false);

    CLI::App* audit = app.add_subcommand(
        "audit", "Conservation audit of total J_z through the electron device");
    audit->add_option("--initial", initial,
                      "Electron state: +z, -z, +x or -x")
        ->check(CLI::IsMember({"+z", "-z", "+x", "-x"}));
    audit->add_option("--j0", cfg.j0, "Baseline observer <J_z> (default 0)");
    audit->add_option("--trials", cfg.audit_trials,
                      "Random physical-subspace inputs to sweep")
        ->check(CLI::NonNegativeNumber);
    add_common(audit, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // help text, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!seed_given) cfg.seed = env_default_seed();
        cfg.experiment = app.get_subcommands().front()->get_name();
        cfg.initial = collapse::parse_electron_initial(initial);
        cfg.interpretation = collapse::parse_interpretation(interpretation);
        cfg.branch = collapse::parse_observed_branch(branch);
        cfg.format = collapse::parse_output_format(format);
        if (!phase_grid.empty()) cfg.phase_grid = parse_phase_grid(phase_grid);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        collapse::ExperimentReport report = collapse::execute(cfg);
        collapse::write_output(collapse::emit_report(report, cfg.format),
                               cfg.output_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
