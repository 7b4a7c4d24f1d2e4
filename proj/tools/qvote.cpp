#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qvote/cli/commands.hpp"

using namespace qvote::cli;

int main(int argc, char **argv) {
    CLI::App app{"Exact simulator of quantum anonymous voting with anonymity check"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> run_out;
    auto *run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("scenario", scenario_path, "Scenario YAML file")->required();
    run->add_option("--shots", shots, "Switch to Monte-Carlo mode with N shots");
    run->add_option("--seed", seed, "Monte-Carlo seed");
    run->add_option("--out", run_out, "Write the report as JSON");

    std::string attack_text = "none";
    int scan_n = 0;
    int scan_s = 0;
    std::optional<std::string> scan_out;
    auto *scan = app.add_subcommand("scan", "Detection probability of an attack on every event");
    scan->add_option("--attack", attack_text,
                     "none | single-qubit:I | diagonal-phases:A,B,... | apparatus:FILE | "
                     "random:SEED")
        ->default_val("none");
    scan->add_option("--n", scan_n, "Voter count")->required();
    scan->add_option("--s", scan_s, "Announced tally")->required();
    scan->add_option("--out", scan_out, "Write the table as CSV");

    std::string suite;
    VerifyParams verify_params;
    auto *verify = app.add_subcommand("verify", "Run a verification suite");
    verify->add_option("suite", suite, "lemma | pvm | theorem")
        ->required()
        ->check(CLI::IsMember({"lemma", "pvm", "theorem"}));
    verify->add_option("--n", verify_params.n, "Size (max n for lemma/pvm)");
    verify->add_option("--s", verify_params.s, "Tally for the theorem suite");
    verify->add_option("--trials", verify_params.trials, "Sampled apparatus count");
    verify->add_option("--seed", verify_params.seed, "Base seed for the theorem suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) {
            ScenarioConfig config = load_scenario(scenario_path);
            if (shots || seed) {
                std::uint64_t base_seed = 0;
                if (const auto *mc = std::get_if<MonteCarloMode>(&config.mode)) {
                    base_seed = mc->seed;
                    if (!shots) {
                        shots = mc->shots;
                    }
                }
                if (!shots || *shots == 0) {
                    std::cerr << "error: --seed needs --shots N with N > 0\n";
                    return kExitUsage;
                }
                config.mode = MonteCarloMode{*shots, seed.value_or(base_seed)};
            }
            return cmd_run(config, std::cout, run_out);
        }
        if (*scan) {
            return cmd_scan(parse_attack_spec(attack_text), scan_n, scan_s, std::cout, scan_out);
        }
        return cmd_verify(suite, verify_params, std::cout);
    } catch (const ScenarioError &e) {
        std::cerr << "error: " << e.what() << '\n';
    } catch (const qvote::ResourceLimit &e) {
        std::cerr << "error: resource limit: " << e.what() << '\n';
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kExitUsage;
}
