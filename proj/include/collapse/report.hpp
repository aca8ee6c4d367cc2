// Report serialization: deterministic JSON, flattened CSV and a fixed-width
// human table, plus the run configuration shared by the CLI and tests.
//
// JSON output is byte-stable for identical configurations: keys are emitted
// in a fixed order and every floating-point number is rendered with 15
// significant digits.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "collapse/experiments.hpp"

namespace collapse {

enum class OutputFormat { json, csv, table };

inline std::string to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::json: return "json";
        case OutputFormat::csv: return "csv";
        case OutputFormat::table: return "table";
    }
    return "?";
}

inline OutputFormat parse_output_format(const std::string& s) {
    if (s == "json") return OutputFormat::json;
    if (s == "csv") return OutputFormat::csv;
    if (s == "table") return OutputFormat::table;
    throw std::invalid_argument("unknown output format '" + s + "'");
}

// Distributions beyond this many outcomes (large-N photon runs) are omitted
// from serialized reports.
inline constexpr std::size_t kMaxSerializedOutcomes = 1025;

// Validated run configuration. Seed precedence is handled by the CLI:
// explicit flag, then COLLAPSE_LAB_SEED, then kDefaultSeed.
struct RunConfig {
    std::string experiment;  // electron | photons | retrodict | audit

    ElectronInitial initial = ElectronInitial::plus_z;  // electron, audit
    double j0 = 0.0;                                    // electron, audit
    std::int64_t n_photons = 1;                         // photons
    double n_b = 0.0;                                   // photons
    ObservedBranch branch = ObservedBranch::m_plus_plus;  // retrodict
    std::vector<double> phase_grid;                       // retrodict sweep
    std::int64_t audit_trials = 0;                        // audit

    Interpretation interpretation = Interpretation::both;
    std::int64_t samples = 0;  // 0 = exact-ensemble mode only
    std::uint64_t seed = kDefaultSeed;
    OutputFormat format = OutputFormat::json;
    std::string output_path;  // empty = stdout
};

inline ExperimentReport execute(const RunConfig& cfg) {
    if (cfg.samples < 0)
        throw std::invalid_argument("samples must be >= 0");
    if (cfg.experiment == "electron")
        return run_electron_experiment(cfg.initial, cfg.interpretation, cfg.j0,
                                       cfg.samples, cfg.seed);
    if (cfg.experiment == "photons")
        return run_photon_experiment(cfg.n_photons, cfg.interpretation, cfg.n_b,
                                     cfg.samples, cfg.seed);
    if (cfg.experiment == "retrodict") {
        ExperimentReport report = run_retrodiction(cfg.branch);
        if (!cfg.phase_grid.empty())
            report.phase_sweep = retrodict_phase_sweep(cfg.phase_grid);
        report.seed = cfg.seed;
        return report;
    }
    if (cfg.experiment == "audit")
        return run_audit_experiment(cfg.initial, cfg.j0, cfg.audit_trials,
                                    cfg.seed);
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
}

// ----- number / string rendering ----------------------------------------------

// 15 significant digits; integer-valued doubles keep a trailing ".0" so the
// JSON stays float-typed.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

namespace detail {

inline std::string render_input_value(const InputValue& v, bool json) {
    if (std::holds_alternative<std::string>(v)) {
        const auto& s = std::get<std::string>(v);
        return json ? "\"" + json_escape(s) + "\"" : s;
    }
    if (std::holds_alternative<double>(v))
        return format_double(std::get<double>(v));
    return std::to_string(std::get<std::int64_t>(v));
}

}  // namespace detail

// ----- JSON --------------------------------------------------------------------

inline std::string emit_json(const ExperimentReport& r) {
    std::string out = "{";
    auto key = [&](const std::string& name) {
        if (out.size() > 1) out += ',';
        out += '"';
        out += name;
        out += "\":";
    };

    key("experiment");
    out += "\"" + json_escape(r.experiment) + "\"";

    key("inputs");
    out += '{';
    for (std::size_t i = 0; i < r.inputs.size(); ++i) {
        if (i) out += ',';
        out += "\"" + json_escape(r.inputs[i].first) + "\":" +
               detail::render_input_value(r.inputs[i].second, true);
    }
    out += '}';

    key("seed");
    out += std::to_string(r.seed);

    key("expectations");
    out += '{';
    bool first = true;
    if (r.everett) {
        out += "\"everett\":" + format_double(*r.everett);
        first = false;
    }
    if (r.copenhagen) {
        if (!first) out += ',';
        out += "\"copenhagen\":" + format_double(*r.copenhagen);
    }
    out += '}';

    if (auto d = r.delta()) {
        key("delta");
        out += format_double(*d);
    }

    if (!r.outcome_probs.empty() &&
        r.outcome_probs.size() <= kMaxSerializedOutcomes) {
        key("distribution");
        if (r.count_distribution) {
            out += '[';
            for (std::size_t i = 0; i < r.outcome_probs.size(); ++i) {
                if (i) out += ',';
                out += format_double(r.outcome_probs[i]);
            }
            out += ']';
        } else {
            out += '{';
            for (std::size_t i = 0; i < r.outcome_probs.size(); ++i) {
                if (i) out += ',';
                out += "\"" + json_escape(r.outcome_labels[i]) +
                       "\":" + format_double(r.outcome_probs[i]);
            }
            out += '}';
        }
    }

    if (r.sampled && r.sampled->frequencies.size() <= kMaxSerializedOutcomes) {
        key("sampled");
        out += "{\"samples\":" + std::to_string(r.sampled->samples) +
               ",\"frequencies\":";
        if (r.count_distribution) {
            out += '[';
            for (std::size_t i = 0; i < r.sampled->frequencies.size(); ++i) {
                if (i) out += ',';
                out += format_double(r.sampled->frequencies[i]);
            }
            out += ']';
        } else {
            out += '{';
            for (std::size_t i = 0; i < r.sampled->frequencies.size(); ++i) {
                if (i) out += ',';
                out += "\"" + json_escape(r.outcome_labels[i]) +
                       "\":" + format_double(r.sampled->frequencies[i]);
            }
            out += '}';
        }
        out += '}';
    }

    key("findings");
    out += '[';
    for (std::size_t i = 0; i < r.findings.size(); ++i) {
        const auto& f = r.findings[i];
        if (i) out += ',';
        out += "{\"stage\":\"" + json_escape(f.stage) + "\",\"state\":\"" +
               json_escape(f.state) +
               "\",\"probability\":" + format_double(f.probability) +
               ",\"false_memory\":" + (f.false_memory ? "true" : "false") +
               ",\"tag\":\"" + json_escape(f.tag) + "\"}";
    }
    out += ']';

    if (!r.phase_sweep.empty()) {
        key("phase_sweep");
        out += '[';
        for (std::size_t i = 0; i < r.phase_sweep.size(); ++i) {
            if (i) out += ',';
            out += "{\"phi\":" + format_double(r.phase_sweep[i].phi) +
                   ",\"false_memory_overlap_sq\":" +
                   format_double(r.phase_sweep[i].false_memory_overlap_sq) + "}";
        }
        out += ']';
    }

    if (r.audit) {
        key("audit");
        out += "{\"observable\":\"" + json_escape(r.audit->observable) +
               "\",\"before\":" + format_double(r.audit->expectation_before) +
               ",\"everett\":" +
               format_double(r.audit->expectation_after_everett) +
               ",\"copenhagen\":" +
               format_double(r.audit->expectation_after_copenhagen) +
               ",\"delta\":" + format_double(r.audit->delta()) + "}";
    }

    if (r.max_conservation_violation) {
        key("max_conservation_violation");
        out += format_double(*r.max_conservation_violation);
    }

    out += "}\n";
    return out;
}

// ----- CSV ---------------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

inline std::string emit_csv(const ExperimentReport& r) {
    std::ostringstream out;
    if (r.experiment == "retrodict") {
        out << "experiment,branch,stage,state,probability,false_memory,tag\n";
        std::string branch;
        for (const auto& [k, v] : r.inputs)
            if (k == "branch") branch = std::get<std::string>(v);
        for (const auto& f : r.findings)
            out << r.experiment << ',' << detail::csv_field(branch) << ','
                << f.stage << ',' << detail::csv_field(f.state) << ','
                << format_double(f.probability) << ','
                << (f.false_memory ? "true" : "false") << ',' << f.tag << '\n';
        for (const auto& p : r.phase_sweep)
            out << r.experiment << ',' << detail::csv_field(branch)
                << ",phase_sweep,phi=" << format_double(p.phi) << ','
                << format_double(p.false_memory_overlap_sq) << ",," << '\n';
        return out.str();
    }

    std::vector<std::string> names{"experiment"};
    std::vector<std::string> values{r.experiment};
    for (const auto& [k, v] : r.inputs) {
        names.push_back(k);
        values.push_back(detail::render_input_value(v, false));
    }
    names.push_back("seed");
    values.push_back(std::to_string(r.seed));
    if (r.everett) {
        names.push_back("everett");
        values.push_back(format_double(*r.everett));
    }
    if (r.copenhagen) {
        names.push_back("copenhagen");
        values.push_back(format_double(*r.copenhagen));
    }
    if (auto d = r.delta()) {
        names.push_back("delta");
        values.push_back(format_double(*d));
    }
    if (r.audit) {
        names.insert(names.end(), {"audit_before", "audit_everett",
                                   "audit_copenhagen", "audit_delta"});
        values.push_back(format_double(r.audit->expectation_before));
        values.push_back(format_double(r.audit->expectation_after_everett));
        values.push_back(format_double(r.audit->expectation_after_copenhagen));
        values.push_back(format_double(r.audit->delta()));
    }
    if (r.max_conservation_violation) {
        names.push_back("max_conservation_violation");
        values.push_back(format_double(*r.max_conservation_violation));
    }
    if (!r.outcome_probs.empty() &&
        r.outcome_probs.size() <= kMaxSerializedOutcomes) {
        for (std::size_t i = 0; i < r.outcome_probs.size(); ++i) {
            names.push_back("p_" + r.outcome_labels[i]);
            values.push_back(format_double(r.outcome_probs[i]));
        }
    }
    for (std::size_t i = 0; i < names.size(); ++i)
        out << (i ? "," : "") << detail::csv_field(names[i]);
    out << '\n';
    for (std::size_t i = 0; i < values.size(); ++i)
        out << (i ? "," : "") << detail::csv_field(values[i]);
    out << '\n';
    return out.str();
}

// ----- fixed-width table ---------------------------------------------------------

inline std::string emit_table(const ExperimentReport& r) {
    std::ostringstream out;
    char line[160];

    out << "experiment      " << r.experiment << '\n';
    out << "inputs          ";
    for (std::size_t i = 0; i < r.inputs.size(); ++i)
        out << (i ? "  " : "") << r.inputs[i].first << '='
            << detail::render_input_value(r.inputs[i].second, false);
    out << '\n';
    out << "interpretation  " << to_string(r.interpretation) << '\n';
    out << "seed            " << r.seed << '\n';

    if (r.everett || r.copenhagen) {
        out << "expectation of " << r.observable << ":\n";
        if (r.everett) {
            std::snprintf(line, sizeof(line), "  %-14s %s\n", "everett",
                          format_double(*r.everett).c_str());
            out << line;
        }
        if (r.copenhagen) {
            std::snprintf(line, sizeof(line), "  %-14s %s\n", "copenhagen",
                          format_double(*r.copenhagen).c_str());
            out << line;
        }
        if (auto d = r.delta()) {
            std::snprintf(line, sizeof(line), "  %-14s %s\n", "delta",
                          format_double(*d).c_str());
            out << line;
        }
    }

    if (!r.outcome_probs.empty() &&
        r.outcome_probs.size() <= kMaxSerializedOutcomes) {
        out << "outcome distribution";
        if (r.sampled)
            out << " (exact | sampled over " << r.sampled->samples << "):\n";
        else
            out << ":\n";
        for (std::size_t i = 0; i < r.outcome_probs.size(); ++i) {
            std::snprintf(line, sizeof(line), "  %-10s %-22s",
                          r.outcome_labels[i].c_str(),
                          format_double(r.outcome_probs[i]).c_str());
            out << line;
            if (r.sampled)
                out << ' ' << format_double(r.sampled->frequencies[i]);
            out << '\n';
        }
    }

    if (!r.findings.empty()) {
        out << "findings:\n";
        for (const auto& f : r.findings) {
            std::snprintf(line, sizeof(line), "  %-24s %-18s p=%-10s %s\n",
                          f.stage.c_str(), f.state.c_str(),
                          format_double(f.probability).c_str(),
                          f.false_memory ? "FALSE MEMORY" : f.tag.c_str());
            out << line;
        }
    }

    if (!r.phase_sweep.empty()) {
        out << "phase sweep (overlap^2 with false-memory state):\n";
        for (const auto& p : r.phase_sweep) {
            std::snprintf(line, sizeof(line), "  phi=%-20s %s\n",
                          format_double(p.phi).c_str(),
                          format_double(p.false_memory_overlap_sq).c_str());
            out << line;
        }
    }

    if (r.audit) {
        out << "conservation audit (" << r.audit->observable << "):\n";
        std::snprintf(line, sizeof(line),
                      "  before=%s  everett=%s  copenhagen=%s  delta=%s\n",
                      format_double(r.audit->expectation_before).c_str(),
                      format_double(r.audit->expectation_after_everett).c_str(),
                      format_double(r.audit->expectation_after_copenhagen).c_str(),
                      format_double(r.audit->delta()).c_str());
        out << line;
    }
    if (r.max_conservation_violation) {
        out << "max |before - everett| over random inputs: "
            << format_double(*r.max_conservation_violation) << '\n';
    }

    std::snprintf(line, sizeof(line), "runtime         %.3f ms\n",
                  r.runtime_seconds * 1e3);
    out << line;
    return out.str();
}

inline std::string emit_report(const ExperimentReport& r, OutputFormat format) {
    switch (format) {
        case OutputFormat::json: return emit_json(r);
        case OutputFormat::csv: return emit_csv(r);
        case OutputFormat::table: return emit_table(r);
    }
    throw std::invalid_argument("emit_report: bad format");
}

// Writes to the configured path or stdout; throws std::runtime_error on an
// unwritable path.
inline void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output path '" + path + "'");
    file << text;
    file.flush();
    if (!file) throw std::runtime_error("failed writing output to '" + path + "'");
}

}  // namespace collapse
