#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plc/analysis.hpp"
#include "plc/config.hpp"

namespace {

int run_command(const std::string& config_path, int trials_flag, const std::string& privacy_flag,
                bool emit_queries, bool machine) {
    plc::RunConfig cfg = plc::parse_config_file(config_path);

    // Trials precedence: --trials, then the config, then PLC_TRIALS, then 20.
    std::size_t trials = cfg.trials;
    if (!cfg.trials_set) {
        if (const char* env = std::getenv("PLC_TRIALS")) trials = std::stoul(env);
    }
    if (trials_flag >= 0) trials = static_cast<std::size_t>(trials_flag);

    plc::PrivacyMode privacy = cfg.privacy;
    if (privacy_flag == "off")
        privacy = plc::PrivacyMode::Off;
    else if (privacy_flag == "structural")
        privacy = plc::PrivacyMode::Structural;
    else if (privacy_flag == "exhaustive")
        privacy = plc::PrivacyMode::Exhaustive;
    else if (!privacy_flag.empty()) {
        std::cerr << "unknown privacy mode '" << privacy_flag << "'\n";
        return 2;
    }

    plc::Instance inst = cfg.instance();
    bool all_pass = true;
    std::ostream& out = std::cout;

    plc::QueryPlan plan = inst.make_plan(inst.v, inst.seed);
    plc::RateReport report = plc::make_rate_report(inst, plan);

    plc::RecoveryReport rec;
    if (cfg.message_file) {
        std::ifstream mf(*cfg.message_file);
        if (!mf) {
            std::cerr << "error: cannot open message file '" << *cfg.message_file << "'\n";
            return 2;
        }
        plc::MessageArray w = plc::MessageArray::load(mf, inst.spec.f, inst.beta(), inst.code.k,
                                                      inst.field);
        rec = plc::verify_recovery_fixed(inst, w, trials, plc::Exec::Parallel);
    } else {
        rec = plc::verify_recovery(inst, trials, plc::Exec::Parallel);
    }
    if (!rec.pass) all_pass = false;

    bool privacy_pass = true;
    std::string privacy_detail;
    std::string privacy_name = "off";
    if (privacy == plc::PrivacyMode::Structural) {
        privacy_name = "structural";
        auto sp = plc::verify_privacy_structural(inst);
        privacy_pass = sp.pass;
        privacy_detail = sp.detail;
    } else if (privacy == plc::PrivacyMode::Exhaustive) {
        privacy_name = "exhaustive";
        auto ep = plc::verify_privacy_exhaustive(inst, cfg.privacy_budget, plc::Exec::Parallel);
        privacy_pass = ep.pass;
        privacy_detail = ep.detail;
    }
    if (!privacy_pass) all_pass = false;

    // A capacity-achieving rate matrix must land exactly on the capacity.
    if (report.lambda_capacity_achieving && !report.achieves_capacity) all_pass = false;

    if (machine) {
        out << plc::render_machine(report);
        out << "trials=" << trials << "\n";
        out << "recovery=" << (rec.pass ? "pass" : "fail") << "\n";
        if (!rec.pass && rec.first_failure) {
            const auto& ce = *rec.first_failure;
            out << "recovery_counterexample=trial " << ce.trial << " seed " << ce.trial_seed
                << " row " << (ce.row + 1) << " col " << (ce.col + 1) << " got " << ce.got
                << " want " << ce.want << "\n";
        }
        out << "privacy_mode=" << privacy_name << "\n";
        if (privacy != plc::PrivacyMode::Off)
            out << "privacy=" << (privacy_pass ? "pass" : "fail") << "\n";
        out << "ok=" << (all_pass ? "true" : "false") << "\n";
    } else {
        out << plc::render_human(report);
        out << "  recovery        " << (rec.pass ? "pass" : "FAIL") << " (" << trials
            << " trials)\n";
        if (!rec.pass && rec.first_failure) {
            const auto& ce = *rec.first_failure;
            out << "    counterexample: trial " << ce.trial << ", seed " << ce.trial_seed
                << ", row " << (ce.row + 1) << ", col " << (ce.col + 1) << ", got " << ce.got
                << ", want " << ce.want << "\n";
        }
        out << "  privacy         " << privacy_name;
        if (privacy != plc::PrivacyMode::Off)
            out << " " << (privacy_pass ? "pass" : "FAIL")
                << (privacy_detail.empty() ? "" : "\n    " + privacy_detail);
        out << "\n";
        out << "  overall         " << (all_pass ? "PASS" : "FAIL") << "\n";
    }

    if (emit_queries || cfg.emit_queries) {
        out << "retained queries (j tau kind terms):\n";
        out << plc::dump_plan(plan);
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Private linear computation simulator for linearly coded storage"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    std::string config_path;
    int trials = -1;
    std::string privacy;
    bool emit_queries = false;
    bool machine = false;
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--trials", trials, "recovery trials (overrides config and PLC_TRIALS)");
    run->add_option("--privacy", privacy, "off|structural|exhaustive");
    run->add_flag("--emit-queries", emit_queries, "print the retained query table");
    run->add_flag("--machine", machine, "line-oriented key=value output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run_command(config_path, trials, privacy, emit_queries, machine);
    } catch (const plc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
