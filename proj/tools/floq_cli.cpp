// Command-line front end: preset listing, config validation, experiment runs
// and drive design. Exit codes: 0 success, 2 validation failure, 3 numeric
// abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "floq/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw floq::ValidationError("cannot read file: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

floq::Scenario load_scenario(const std::string& ref) {
    if (floq::preset_document(ref) != nullptr) return floq::preset(ref);
    return floq::parse_scenario(read_file(ref));
}

const char* level_name(floq::FindingLevel level) {
    switch (level) {
        case floq::FindingLevel::pass: return "pass";
        case floq::FindingLevel::warn: return "WARN";
        case floq::FindingLevel::fail: return "FAIL";
    }
    return "?";
}

void print_findings(const floq::ValidityReport& rep) {
    for (const auto& f : rep.findings)
        std::printf("  [%s] %s: %s\n", level_name(f.level), f.code.c_str(), f.message.c_str());
}

int cmd_list() {
    for (const auto& p : floq::list_presets())
        std::printf("%-6s %s\n", p.name.c_str(), p.description.c_str());
    return 0;
}

int cmd_validate(const std::string& ref) {
    const auto s = load_scenario(ref);
    const auto scales = floq::compute_scales(s.system, s.filter.omega_c);
    auto rep = floq::validate(s.system, scales, s.epsilon_threshold);
    if (!s.system.terms.empty())
        rep.findings.push_back(floq::dissipator_hermiticity_probe(s.system, scales));
    std::printf("%s: Omega = %.6g/T0, omega_min = %.6g rad/T0, epsilon = %.4g\n",
                s.name.c_str(), scales.Omega, scales.omega_min, scales.epsilon);
    print_findings(rep);
    if (!rep.ok()) {
        std::printf("validation FAILED\n");
        return 2;
    }
    std::printf("validation OK%s\n", rep.clean() ? "" : " (with warnings)");
    return 0;
}

int cmd_run(const std::string& ref, const std::string& out_dir, const std::string& variant) {
    floq::Scenario s = load_scenario(ref);
    if (!variant.empty()) {
        s.variants = {variant};
        const std::string keep = floq::detail::variant_series_name(variant);
        std::erase_if(s.comparisons, [&](const floq::ComparisonSpec& c) {
            auto produced = [&](const std::string& name) {
                return name == "exact" || name == "tcg" || name == keep;
            };
            return !produced(c.a) || !produced(c.b);
        });
        if (s.comparisons.empty())
            s.comparisons.push_back({"tcg", keep, 0, 1, "re"});
    }

    const auto res = out_dir.empty() ? floq::run_scenario(s)
                                     : floq::run_scenario_to_dir(s, out_dir);
    const auto& rep = res.report;

    std::printf("%s: epsilon = %.4g, unitarity defect = %.3g, ic projection = %.3g\n",
                rep.scenario.c_str(), rep.scales.epsilon, rep.unitarity_defect,
                rep.ic_projection);
    print_findings(rep.validity);
    for (const auto& [name, diag] : rep.me_diagnostics) {
        std::printf("  %-9s trace dev %.3g, hermiticity defect %.3g, min eigenvalue %.3g",
                    name.c_str(), diag.max_trace_dev, diag.max_hermiticity_defect,
                    diag.min_eigenvalue);
        if (!diag.dips.empty())
            std::printf(" (%zu dip(s) below -1e-3)", diag.dips.size());
        std::printf("\n");
    }
    for (const auto& c : rep.comparisons)
        std::printf("  %s(%d%d) %s vs %s: Linf = %.5f, rms = %.5f\n", c.component.c_str(),
                    c.row, c.col, c.a.c_str(), c.b.c_str(), c.linf, c.rms);
    std::printf("  window [%.6g, %.6g] T0, wall %.2f s\n", rep.window_start, rep.window_end,
                rep.wall_seconds);
    if (!out_dir.empty()) std::printf("  wrote %s/series.csv and report.json\n", out_dir.c_str());
    return 0;
}

int cmd_design(const std::string& file, const std::string& out_dir) {
    const auto doc = floq::json::parse(read_file(file), nullptr, true);

    floq::DissipationTarget target;
    target.omega_c = floq::cfg::parse_freq(floq::cfg::need(doc, "omega_c", ""), "omega_c");
    floq::Mat h0;
    if (doc.contains("h0")) h0 = floq::cfg::parse_matrix(doc.at("h0"), "h0");
    if (doc.contains("jumps")) {
        for (size_t k = 0; k < doc.at("jumps").size(); ++k) {
            const auto& jj = doc.at("jumps")[k];
            const std::string path = "jumps[" + std::to_string(k) + "]";
            floq::JumpTarget j;
            j.jump = floq::cfg::parse_matrix(floq::cfg::need(jj, "jump", path), path + ".jump");
            j.amplitude =
                floq::cfg::parse_complex(floq::cfg::need(jj, "amplitude", path), path + ".amplitude");
            j.carrier = floq::cfg::parse_freq(floq::cfg::need(jj, "carrier", path), path + ".carrier");
            j.beat = floq::cfg::parse_freq(floq::cfg::need(jj, "beat", path), path + ".beat");
            j.phase = jj.value("phase", 0.0);
            target.jumps.push_back(std::move(j));
        }
    }

    const auto res = floq::design(target, h0);
    std::printf("designed %zu Floquet terms (epsilon = %.4g):\n", res.system.terms.size(),
                res.scales.epsilon);
    for (const auto& term : res.system.terms)
        std::printf("  omega = %.9g rad/T0, |V| = %.6g/T0\n", term.omega,
                    floq::spectral_norm(term.v));
    print_findings(res.report);
    for (size_t m = 0; m < target.jumps.size(); ++m) {
        const double tq = 0.25 * 2.0 * M_PI / target.jumps[m].beat;
        std::printf("  jump %zu: predicted peak rate %.6g/T0, realized %.6g/T0\n", m,
                    std::abs(floq::predicted_rate(target, m, tq)),
                    std::abs(floq::realized_rate(res, m, tq)));
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        floq::json out;
        out["epsilon"] = res.scales.epsilon;
        out["terms"] = floq::json::array();
        for (const auto& term : res.system.terms) {
            floq::json rows = floq::json::array();
            for (int r = 0; r < term.v.dim(); ++r) {
                floq::json row = floq::json::array();
                for (int c = 0; c < term.v.dim(); ++c)
                    row.push_back({term.v(r, c).real(), term.v(r, c).imag()});
                rows.push_back(row);
            }
            out["terms"].push_back({{"omega", term.omega}, {"v", rows}});
        }
        std::ofstream os(std::filesystem::path(out_dir) / "design.json", std::ios::binary);
        os << out.dump(2) << "\n";
        std::printf("  wrote %s/design.json\n", out_dir.c_str());
    }
    return res.report.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multichromatic Floquet dissipation engineering"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "list built-in presets");

    std::string validate_ref;
    auto* validate = app.add_subcommand("validate", "validate a scenario file or preset");
    validate->add_option("file", validate_ref, "scenario JSON file or preset name")->required();

    std::string run_ref, run_out, run_variant;
    auto* run = app.add_subcommand("run", "run a scenario file or preset");
    run->add_option("file", run_ref, "scenario JSON file or preset name")->required();
    run->add_option("--out", run_out, "output directory for series.csv and report.json");
    run->add_option("--variant", run_variant, "restrict to one master-equation variant")
        ->check(CLI::IsMember({"full", "no-fsf", "l3"}));

    std::string design_file, design_out;
    auto* design = app.add_subcommand("design", "synthesise a drive from a dissipation target");
    design->add_option("target", design_file, "dissipation target JSON file")->required();
    design->add_option("--out", design_out, "output directory for design.json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) return cmd_list();
        if (validate->parsed()) return cmd_validate(validate_ref);
        if (run->parsed()) return cmd_run(run_ref, run_out, run_variant);
        if (design->parsed()) return cmd_design(design_file, design_out);
    } catch (const floq::NumericError& e) {
        std::fprintf(stderr, "numeric abort: %s\n", e.what());
        return 3;
    } catch (const floq::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
