#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "dircal/serialize.hpp"
#include "support/cli_run.hpp"
#include "support/sampling.hpp"

namespace dircal {
namespace {

using testing::run_cli;
using testing::ScratchDir;

constexpr const char* kThreeLogits = "z_0,z_1,label\n2,0,0\n0,2,1\n2,0,1\n";
constexpr const char* kFourRows = "p_0,p_1,label\n0.2,0.8,1\n0.4,0.6,1\n0.9,0.1,0\n0.7,0.3,0\n";

void write_synthetic(const std::string& path, std::uint64_t seed, Index n) {
  rng::Stream s(seed, 0);
  dirichlet::GenerativeParams g;
  g.alpha = Matrix::Constant(3, 3, 2.0) + 2.0 * Matrix::Identity(3, 3);
  g.pi = Vector::Constant(3, 1.0 / 3.0);
  const auto sample = testing::sample_generative(g, n, s);
  testing::write_table(path, sample.q, sample.y, "p_");
}

TEST(Cli, FitTemperatureOnThreeRows) {
  ScratchDir dir("cli_fit_t");
  testing::write_text(dir.file("in.csv"), kThreeLogits);
  const auto r = run_cli({"fit", dir.file("in.csv"), "-m", "temperature", "-o", dir.file("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = load_model(dir.file("m.json"));
  EXPECT_NEAR(std::get<scaling::TemperatureParams>(model.front().params).t, 2.0 / std::log(2.0),
              1e-3);
}

TEST(Cli, EvalFourRows) {
  ScratchDir dir("cli_eval");
  testing::write_text(dir.file("in.csv"), kFourRows);
  const auto r = run_cli({"eval", dir.file("in.csv"), "--bins", "2", "--resamples", "100",
                          "--format", "json-lines"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["conf_ece"].get<double>(), 0.25, 1e-15);
  EXPECT_NEAR(j["cw_ece"].get<double>(), 0.25, 1e-15);
  EXPECT_EQ(j["accuracy"].get<double>(), 1.0);
  EXPECT_TRUE(j.contains("p_conf_ece"));
  EXPECT_TRUE(j.contains("p_cw_ece"));
}

TEST(Cli, ApplyUncalibratedAndUnitTemperature) {
  ScratchDir dir("cli_apply");
  testing::write_text(dir.file("p.csv"), kFourRows);
  ASSERT_EQ(run_cli({"fit", dir.file("p.csv"), "-m", "uncalibrated", "-o", dir.file("u.json")}).code,
            0);
  const auto u = run_cli({"apply", dir.file("u.json"), dir.file("p.csv")});
  ASSERT_EQ(u.code, 0) << u.err;
  std::istringstream in(u.out);
  const auto t = read_predictions(in);
  EXPECT_NEAR(t.values(0, 0), 0.2, 1e-15);
  EXPECT_NEAR(t.values(3, 1), 0.3, 1e-15);

  testing::write_text(dir.file("z.csv"), kThreeLogits);
  ASSERT_EQ(run_cli({"fit", dir.file("z.csv"), "-m", "temperature", "-o", dir.file("t.json")}).code,
            0);
  auto model = load_model(dir.file("t.json"));
  std::get<scaling::TemperatureParams>(model.members[0].params).t = 1.0;
  save_model(model, dir.file("t1.json"));
  const auto a = run_cli({"apply", dir.file("t1.json"), dir.file("z.csv")});
  ASSERT_EQ(a.code, 0) << a.err;
  std::istringstream in2(a.out);
  const auto out = read_predictions(in2);
  EXPECT_NEAR(out.values(0, 0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Cli, FitApplyIsBitStable) {
  ScratchDir dir("cli_stable");
  write_synthetic(dir.file("d.csv"), 111, 300);
  for (const char* run : {"a", "b"}) {
    const std::string m = dir.file(std::string(run) + ".json");
    ASSERT_EQ(run_cli({"fit", dir.file("d.csv"), "-m", "dirichlet_odir", "--grid", "--folds", "3",
                       "--seed", "9", "-o", m})
                  .code,
              0);
    ASSERT_EQ(run_cli({"apply", m, dir.file("d.csv"), "-o", dir.file(std::string(run) + ".csv")})
                  .code,
              0);
  }
  EXPECT_EQ(testing::slurp(dir.file("a.json")), testing::slurp(dir.file("b.json")));
  EXPECT_EQ(testing::slurp(dir.file("a.csv")), testing::slurp(dir.file("b.csv")));
  EXPECT_EQ(load_model(dir.file("a.json")).members.size(), 3u);
}

TEST(Cli, CompareIsDeterministic) {
  ScratchDir dir("cli_compare");
  write_synthetic(dir.file("d.csv"), 112, 240);
  const std::vector<std::string> args{"compare", dir.file("d.csv"), "--methods",
                                      "dirichlet_l2,uncalibrated", "--repeats", "1", "--folds",
                                      "3", "--inner-folds", "2", "--resamples", "50", "--seed",
                                      "4", "--format", "csv"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("dirichlet_l2"), std::string::npos);
}

TEST(Cli, DiagramAndInspectAndTest) {
  ScratchDir dir("cli_misc");
  testing::write_text(dir.file("p.csv"), kFourRows);
  const auto d = run_cli({"diagram", dir.file("p.csv"), "--bins", "2", "-o", dir.file("r.svg")});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_NE(testing::slurp(dir.file("r.svg")).find("<svg"), std::string::npos);
  EXPECT_FALSE(testing::slurp(dir.file("r.bins.csv")).empty());

  ASSERT_EQ(run_cli({"fit", dir.file("p.csv"), "-m", "dirichlet_l2", "-o", dir.file("m.json")}).code,
            0);
  const auto i = run_cli({"inspect", dir.file("m.json")});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_NE(i.out.find("A_row_0"), std::string::npos);

  const auto t = run_cli({"test", dir.file("p.csv"), "--resamples", "200", "--seed", "3",
                          "--format", "json-lines"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_EQ(t.out, run_cli({"test", dir.file("p.csv"), "--resamples", "200", "--seed", "3",
                            "--format", "json-lines"})
                       .out);
}

TEST(Cli, ExitCodes) {
  ScratchDir dir("cli_codes");
  testing::write_text(dir.file("p.csv"), kFourRows);
  testing::write_text(dir.file("bad.csv"), "p_0,p_1\n0.5,oops\n");
  testing::write_text(dir.file("sum.csv"), "p_0,p_1,label\n0.5,0.9,0\n0.5,0.5,1\n");
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"nosuch"}).code, 2);
  EXPECT_EQ(run_cli({"eval"}).code, 2);
  EXPECT_EQ(run_cli({"eval", dir.file("bad.csv")}).code, 2);
  EXPECT_EQ(run_cli({"eval", dir.file("sum.csv")}).code, 3);
  EXPECT_EQ(run_cli({"eval", dir.file("p.csv"), "--bins", "0"}).code, 3);
  EXPECT_EQ(run_cli({"eval", dir.file("p.csv"), "--format", "xml"}).code, 3);
  EXPECT_EQ(run_cli({"fit", dir.file("p.csv"), "-m", "temperature", "-o", dir.file("m.json")}).code,
            3);
  EXPECT_EQ(run_cli({"fit", dir.file("p.csv"), "-m", "bogus", "-o", dir.file("m.json")}).code, 3);
  EXPECT_EQ(run_cli({"apply", dir.file("missing.json"), dir.file("p.csv")}).code, 2);
  EXPECT_EQ(run_cli({"fit", dir.file("p.csv"), "-m", "dirichlet_l2", "--max-iter", "1", "--tol",
                     "1e-300", "-o", dir.file("m.json")})
                .code,
            4);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

#ifdef DIRCAL_EXE
TEST(Cli, SpawnedBinaryExitCodes) {
  ScratchDir dir("cli_spawn");
  testing::write_text(dir.file("bad.csv"), "p_0,p_1\n0.5,oops\n");
  const std::string exe = DIRCAL_EXE;
  const auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status(exe + " --version"), 0);
  EXPECT_EQ(status(exe + " eval " + dir.file("bad.csv")), 2);
}
#endif

}  // namespace
}  // namespace dircal
