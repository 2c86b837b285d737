#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dlab/cli.hpp"

using namespace dlab;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dilation_lab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Json load(const fs::path& p) { return parse_json(read_file(p)); }

void write_config(const fs::path& p, const Json& j) { write_file_atomic(p, dump_json(j)); }

}  // namespace

TEST(Cli, DephasingDemoPassesAndPrintsEverySteps) {
  const fs::path dir = scratch("demo");
  const Result r = invoke({"dephasing-demo", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  for (int step = 1; step <= 6; ++step) EXPECT_NE(r.out.find("Step " + std::to_string(step)), std::string::npos);
  const Json j = load(dir / "dephasing_demo.json");
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_LE(j["max_diff"].get<double>(), 1e-10);
  EXPECT_EQ(j["steps"].size(), 6u);
}

TEST(Cli, DemoIsDeterministicForFixedSeed) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  ASSERT_EQ(invoke({"dephasing-demo", "--seed", "77", "--out", a.string()}).code, 0);
  ASSERT_EQ(invoke({"dephasing-demo", "--seed", "77", "--out", b.string()}).code, 0);
  EXPECT_EQ(read_file(a / "dephasing_demo.json"), read_file(b / "dephasing_demo.json"));
}

TEST(Cli, VerifyTransposeMapFailsNumerically) {
  const fs::path dir = scratch("transpose");
  CMatrix s = CMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) s(a * 2 + b, b * 2 + a) = 1.0;
  Json cfg;
  cfg["command"] = "verify";
  cfg["channel"] = encode_channel(ChannelRep::from_superop(s));
  cfg["out"] = dir.string();
  write_config(dir / "job.json", cfg);
  const Result r = invoke({"--config", (dir / "job.json").string()});
  EXPECT_EQ(r.code, 2);
  const Json j = load(dir / "verify.json");
  EXPECT_FALSE(j["cptp"]["cp_ok"].get<bool>());
  EXPECT_TRUE(j["cptp"]["tp_ok"].get<bool>());
}

TEST(Cli, VerifyDefaultChannelPasses) {
  const fs::path dir = scratch("verify_ok");
  const Result r = invoke({"verify", "--gamma", "0.5", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const Json j = load(dir / "verify.json");
  EXPECT_LE(j["dilation"]["max_residual"].get<double>(), 1e-9);
  EXPECT_EQ(j["dilation"]["tolerance"]["norm"].get<std::string>(), "Frobenius (reduced action vs channel)");
}

TEST(Cli, ConvertKrausChoiKrausRoundTrip) {
  const fs::path dir = scratch("convert");
  KrausSet k{2, {std::sqrt(0.6) * CMatrix::Identity(2, 2), std::sqrt(0.4) * pauli::x()}};
  Json cfg;
  cfg["channel"] = encode_channel(ChannelRep::from_kraus(k));
  cfg["target"] = "choi";
  write_config(dir / "job.json", cfg);
  const Result r = invoke({"convert", "--config", (dir / "job.json").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("round-trip residual"), std::string::npos);
  const Json j = load(dir / "convert.json");
  EXPECT_EQ(j["converted"]["type"].get<std::string>(), "choi");
  EXPECT_EQ(j["roundtrip"]["type"].get<std::string>(), "kraus");
  EXPECT_LE(j["roundtrip_residual"].get<double>(), 1e-9);
}

TEST(Cli, ConvertToUnitaryRejectsMixedChannel) {
  const fs::path dir = scratch("convert_unitary");
  Json cfg;
  cfg["command"] = "convert";
  cfg["target"] = "unitary";
  cfg["out"] = dir.string();
  write_config(dir / "job.json", cfg);
  EXPECT_EQ(invoke({"--config", (dir / "job.json").string()}).code, 1);
}

TEST(Cli, CurveCommandsWriteArtifacts) {
  const fs::path dir = scratch("curves");
  EXPECT_EQ(invoke({"evolve", "--grid", "0:1:5", "--out", dir.string()}).code, 0);
  EXPECT_TRUE(fs::exists(dir / "evolve.csv"));
  EXPECT_EQ(invoke({"dilate-exact", "--grid", "0.1:2:40", "--out", dir.string()}).code, 0);
  EXPECT_TRUE(load(dir / "dilation_report.json")["all_verified"].get<bool>());
  EXPECT_EQ(load(dir / "dilation_curve.json")["unitary_curve"]["unitaries"].size(), 40u);
  EXPECT_EQ(invoke({"singularity", "--out", dir.string()}).code, 0);
  const double p = load(dir / "singularity.json")["fitted_exponent"].get<double>();
  EXPECT_NEAR(p, -0.5, 0.05);
  EXPECT_EQ(read_file(dir / "singularity.csv").substr(0, 12), "time,h_norm\n");
  EXPECT_EQ(invoke({"dilate-approx", "--epsilon", "0.05", "--out", dir.string()}).code, 0);
  const Json apx = load(dir / "approx_dilation.json");
  EXPECT_EQ(apx["ancilla_dim"].get<int>(), 8);
  EXPECT_LT(apx["verification"]["measured_sup_error"].get<double>(), 0.05);
  EXPECT_TRUE(fs::exists(dir / "approx_eval.csv"));
}

TEST(Cli, BadConfigurations) {
  const fs::path dir = scratch("bad");
  EXPECT_EQ(invoke({"teleport", "--out", dir.string()}).code, 4);
  EXPECT_EQ(invoke({"verify", "--tol", "-1", "--out", dir.string()}).code, 4);
  EXPECT_EQ(invoke({"evolve", "--grid", "0:1", "--out", dir.string()}).code, 4);
  EXPECT_EQ(invoke({"verify", "--bogus"}).code, 4);
  write_file_atomic(dir / "unknown.json", R"({"command": "verify", "colour": "blue"})");
  EXPECT_EQ(invoke({"--config", (dir / "unknown.json").string()}).code, 4);
  write_file_atomic(dir / "broken.json", R"({"command": )");
  EXPECT_EQ(invoke({"--config", (dir / "broken.json").string()}).code, 4);
  write_file_atomic(dir / "matrix.json",
                    R"({"command": "verify", "channel": {"type": "superop", "matrix": {"rows": 4, "cols": 4, "data": []}}})");
  EXPECT_EQ(invoke({"--config", (dir / "matrix.json").string(), "--out", dir.string()}).code, 4);
}

TEST(Cli, IoFailures) {
  const fs::path dir = scratch("io");
  EXPECT_EQ(invoke({"--config", (dir / "absent.json").string()}).code, 3);
  write_file_atomic(dir / "blocker", "not a directory");
  EXPECT_EQ(invoke({"dephasing-demo", "--out", (dir / "blocker").string()}).code, 3);
}
