#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "qvote/cli/commands.hpp"

using namespace qvote;
using namespace qvote::cli;

namespace {

const std::string kScenarios = QVOTE_SCENARIO_DIR;

std::filesystem::path temp_path(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("qvote_test_" + name);
}

int run_binary(const std::string &args, std::string *output = nullptr) {
    const auto out_file = temp_path("stdout.txt");
    const std::string cmd =
        std::string(QVOTE_BINARY) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(out_file);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string error_of(const std::string &yaml) {
    try {
        parse_scenario(yaml, "s.yaml");
    } catch (const ScenarioError &e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(ParseAngle, Forms) {
    EXPECT_DOUBLE_EQ(parse_angle("0"), 0.0);
    EXPECT_DOUBLE_EQ(parse_angle("1.5"), 1.5);
    EXPECT_DOUBLE_EQ(parse_angle("pi"), std::numbers::pi);
    EXPECT_DOUBLE_EQ(parse_angle("-pi"), -std::numbers::pi);
    EXPECT_DOUBLE_EQ(parse_angle("pi/2"), std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(parse_angle("0.5pi"), std::numbers::pi / 2);
    EXPECT_THROW(parse_angle("tau"), ScenarioError);
    EXPECT_THROW(parse_angle("1.0x"), ScenarioError);
}

TEST(ParseAttackSpec, Kinds) {
    EXPECT_TRUE(std::holds_alternative<NoAttack>(parse_attack_spec("none")));
    EXPECT_EQ(std::get<SingleQubitAttack>(parse_attack_spec("single-qubit:2")).voter, 2);
    const auto phases = std::get<DiagonalPhases>(parse_attack_spec("diagonal-phases:0,pi,0"));
    EXPECT_EQ(phases.phases.size(), 3U);
    EXPECT_DOUBLE_EQ(phases.phases[1], std::numbers::pi);
    EXPECT_EQ(std::get<ApparatusFile>(parse_attack_spec("apparatus:a.json")).path, "a.json");
    EXPECT_EQ(std::get<RandomApparatus>(parse_attack_spec("random:9")).seed, 9U);
    EXPECT_THROW(parse_attack_spec("single-qubit"), ScenarioError);
    EXPECT_THROW(parse_attack_spec("single-qubit:-1"), ScenarioError);
    EXPECT_THROW(parse_attack_spec("laser:1"), ScenarioError);
}

TEST(ParseEvent, CompactForm) {
    const auto e = parse_event("(1,2) 3:1 4:0", 4);
    EXPECT_EQ(e, Event({Check{2}, Check{1}, Vote{1}, Vote{0}}));
    EXPECT_THROW(parse_event("(1,2) 3:1", 4), ScenarioError);
    EXPECT_THROW(parse_event("(1,2) 2:1", 2), ScenarioError);
    EXPECT_THROW(parse_event("(1,1)", 1), ScenarioError);
    EXPECT_THROW(parse_event("1:2", 1), ScenarioError);
    EXPECT_THROW(parse_event("5:1", 1), ScenarioError);
}

TEST(ParseScenario, FullMapping) {
    const auto cfg = parse_scenario(R"(
n: 4
event:
  checks: [[1, 2]]
  votes: {3: 1, 4: 0}
attack: {diagonal-phases: [0, pi, 0, 0, 0, 0]}
mode: {monte-carlo: {shots: 100, seed: 5}}
)");
    EXPECT_EQ(cfg.n, 4);
    EXPECT_EQ(to_string(cfg.event), "(1,2) 3:1 4:0");
    EXPECT_EQ(std::get<DiagonalPhases>(cfg.attack).phases.size(), 6U);
    const auto mc = std::get<MonteCarloMode>(cfg.mode);
    EXPECT_EQ(mc.shots, 100U);
    EXPECT_EQ(mc.seed, 5U);
}

TEST(ParseScenario, DefaultsToExactWithoutAttack) {
    const auto cfg = parse_scenario("n: 1\nevent: \"1:1\"\n");
    EXPECT_TRUE(std::holds_alternative<NoAttack>(cfg.attack));
    EXPECT_TRUE(std::holds_alternative<ExactMode>(cfg.mode));
}

TEST(ParseScenario, DiagnosticsNameLineAndField) {
    EXPECT_NE(error_of("n: 2\nevent:\n  votes: {1: 3, 2: 0}\n").find("s.yaml:3: field 'event.votes'"),
              std::string::npos);
    EXPECT_NE(error_of("n: x\nevent: \"1:1\"\n").find("s.yaml:1: field 'n'"), std::string::npos);
    EXPECT_NE(error_of("n: 2\nevent: \"1:1 2:0\"\nattack: {laser: 1}\n").find("unknown attack kind"),
              std::string::npos);
    EXPECT_NE(error_of("n: 2\nevent: \"1:1 2:0\"\nmode: fast\n").find("field 'mode'"),
              std::string::npos);
    EXPECT_NE(error_of("n: 2\nevent: \"1:1\"\n").find("voter 2 has no action"), std::string::npos);
    EXPECT_NE(error_of("n: 2\nevnt: \"1:1\"\n").find("unknown field"), std::string::npos);
    EXPECT_NE(error_of("n: [1\n").find("s.yaml:"), std::string::npos);
    EXPECT_NE(error_of("n: 1\nevent: \"1:1\"\nmode: {monte-carlo: {shots: 0, seed: 1}}\n")
                  .find("must be positive"),
              std::string::npos);
}

TEST(ApparatusFile, RoundTripAndShapeErrors) {
    std::mt19937_64 rng(4);
    const auto spec = random_apparatus(3, 1, rng);
    const auto back = apparatus_from_json(apparatus_to_json(spec), 3, 1);
    EXPECT_EQ(back.states(), spec.states());

    EXPECT_THROW(apparatus_from_json(apparatus_to_json(spec), 4, 1), ScenarioError);
    nlohmann::json bad = apparatus_to_json(spec);
    bad[0][0][0] = {1.0};
    EXPECT_THROW(apparatus_from_json(bad, 3, 1), ScenarioError);
    EXPECT_THROW(load_apparatus_file("/nonexistent/app.json", 3, 1), ScenarioError);
}

TEST(CmdRun, HonestPairCheck) {
    const auto doc = run_report(load_scenario(kScenarios + "/pair_check_honest.yaml"));
    ASSERT_EQ(doc["tally"].size(), 1U);
    EXPECT_EQ(doc["tally"][0]["s"], 1);
    EXPECT_NEAR(doc["tally"][0]["probability"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(doc["pass_probability"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(doc["config"]["attack"], "none");
    EXPECT_EQ(doc["config"]["event"], "(1,2)");
}

TEST(CmdRun, SingleQubitDetection) {
    std::ostringstream text;
    const auto json_out = temp_path("report.json");
    EXPECT_EQ(cmd_run(load_scenario(kScenarios + "/pair_check_single_qubit.yaml"), text,
                      json_out.string()),
              kExitOk);
    std::ifstream in(json_out);
    const auto doc = nlohmann::json::parse(in);
    EXPECT_NEAR(doc["detection_probability"].get<double>(), 0.5, 1e-12);
    EXPECT_NE(text.str().find("detection probability  0.5"), std::string::npos);
    EXPECT_NE(text.str().find("attack  : single-qubit(1)"), std::string::npos);
}

TEST(CmdRun, MonteCarloWithinThreeSigma) {
    const auto doc = run_report(load_scenario(kScenarios + "/pair_check_single_qubit_mc.yaml"));
    ASSERT_TRUE(doc.contains("monte_carlo"));
    EXPECT_EQ(doc["config"]["seed"], 7);
    EXPECT_EQ(doc["monte_carlo"]["seed"], 7);
    EXPECT_NEAR(doc["monte_carlo"]["failure_frequency"].get<double>(), 0.5, 3 * 0.005);
}

TEST(CmdRun, PhaseAttackAndApparatusFile) {
    EXPECT_NEAR(run_report(load_scenario(kScenarios + "/four_voters_phase.yaml"))
                    ["detection_probability"]
                        .get<double>(),
                1.0, 1e-12);
    EXPECT_NEAR(run_report(load_scenario(kScenarios + "/pair_check_apparatus.yaml"))
                    ["detection_probability"]
                        .get<double>(),
                0.5, 1e-12);
}

TEST(CmdRun, TallyMismatchIsAnError) {
    // Two phases fit d_1 = 2 at n = 2, but this event tallies s = 2.
    const auto cfg = parse_scenario("n: 2\nevent: \"1:1 2:1\"\nattack: {diagonal-phases: [0, pi]}\n");
    EXPECT_THROW(run_report(cfg), ScenarioError);
}

TEST(CmdScan, IdentityAllZero) {
    std::ostringstream out;
    const auto csv_path = temp_path("scan.csv");
    EXPECT_EQ(cmd_scan(NoAttack{}, 3, 1, out, csv_path.string()), kExitOk);
    std::ifstream in(csv_path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "index,event,failure_probability");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_LT(std::stod(line.substr(line.rfind(',') + 1)), 1e-12);
    }
    EXPECT_EQ(static_cast<std::size_t>(rows), enumerate_events(3, 1).size());
}

TEST(CmdScan, SingleQubitRows) {
    const auto report = max_detection(single_qubit_attack(2, 4), 4, 2);
    for (const auto &row : report.per_event) {
        EXPECT_NEAR(row.failure_probability, row.event.votes(2) ? 0.0 : 0.5, 1e-10);
    }
    std::ostringstream out;
    EXPECT_EQ(cmd_scan(SingleQubitAttack{2}, 4, 2, out), kExitOk);
    EXPECT_NE(out.str().find("max detection 0.5"), std::string::npos);
}

TEST(CmdScan, DiagonalPhasesSomeRowNonzero) {
    std::ostringstream out;
    const auto spec = parse_attack_spec("diagonal-phases:0,pi,0,0,0,0");
    EXPECT_EQ(cmd_scan(spec, 4, 2, out), kExitOk);
    const auto attack = build_attack(spec, 4, 2);
    EXPECT_GT(max_detection(*attack, 4, 2).max_probability(), 1e-9);
    EXPECT_THROW(cmd_scan(NoAttack{}, 7, 2, out), ResourceLimit);
}

TEST(CmdVerify, Suites) {
    std::ostringstream out;
    EXPECT_EQ(cmd_verify("lemma", {.n = 6}, out), kExitOk);
    EXPECT_EQ(cmd_verify("pvm", {.n = 4}, out), kExitOk);
    EXPECT_EQ(cmd_verify("theorem", {.n = 3, .s = 1, .trials = 10, .seed = 1}, out), kExitOk);
    EXPECT_NE(out.str().find("PASS"), std::string::npos);
    EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
    EXPECT_THROW(cmd_verify("nonsense", {}, out), ScenarioError);
}

TEST(Binary, ExitCodes) {
    std::string output;
    EXPECT_EQ(run_binary("run " + kScenarios + "/pair_check_single_qubit.yaml", &output), 0);
    EXPECT_NE(output.find("detection probability  0.5"), std::string::npos);

    EXPECT_EQ(run_binary("run " + kScenarios + "/pair_check_single_qubit.yaml --shots 1000 --seed 3",
                         &output),
              0);
    EXPECT_NE(output.find("seed 3"), std::string::npos);

    EXPECT_EQ(run_binary("scan --attack single-qubit:1 --n 2 --s 1", &output), 0);
    EXPECT_EQ(run_binary("verify lemma --n 5", &output), 0);
    EXPECT_EQ(run_binary("verify pvm --n 3", &output), 0);

    EXPECT_EQ(run_binary("run /nonexistent.yaml"), 2);
    EXPECT_EQ(run_binary("scan --attack bogus:1 --n 2 --s 1"), 2);
    EXPECT_EQ(run_binary("scan --n 9 --s 1", &output), 2);
    EXPECT_NE(output.find("resource limit"), std::string::npos);
    EXPECT_EQ(run_binary("verify nothing"), 2);
    EXPECT_EQ(run_binary(""), 2);
}
