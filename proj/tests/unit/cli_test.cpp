#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "cuspmdn/io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using cuspmdn::read_text;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cuspmdn::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string dir() {
  const fs::path d = fs::temp_directory_path() / "cuspmdn_cli_test";
  fs::create_directories(d);
  return d.string() + "/";
}

const std::vector<std::string> kRow1 = {"--coeffs-a", "0.8374,0.5228,3.1822", "--coeffs-b",
                                        "3.5324,0.1579,4.6811"};

std::vector<std::string> generate_args(const std::string& model, const std::string& n,
                                       const std::string& out) {
  std::vector<std::string> a = {"generate", "--model", model, "--n", n, "--seed", "1",
                                "--out", out, "--no-timestamp"};
  if (model != "oliva") a.insert(a.end(), kRow1.begin(), kRow1.end());
  return a;
}

}  // namespace

TEST(Cli, HelpExitsZeroEverywhere) {
  EXPECT_EQ(run({"--help"}).code, 0);
  for (const char* sub : {"generate", "train", "evaluate", "predict", "export-surface", "reproduce"}) {
    const Invocation r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"generate", "--model", "regcusp", "--n", "10"}).code, 2);
  EXPECT_EQ(run({"generate", "--model", "polycusp", "--out", dir() + "x.csv"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"reproduce", "table9"}).code, 2);
  EXPECT_EQ(run({"generate", "--coeffs-a", "1,2", "--out", dir() + "x.csv"}).code, 2);
}

TEST(Cli, RuntimeFailureExitsOne) {
  const Invocation r = run({"train", "--data", dir() + "does_not_exist.csv", "--out", dir() + "m.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, GenerateRegCusp) {
  const std::string path = dir() + "d.csv";
  const Invocation r = run(generate_args("regcusp", "500", path));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rows: 500"), std::string::npos);
  EXPECT_NE(r.out.find("cusp_fraction:"), std::string::npos);
  EXPECT_EQ(cuspmdn::read_dataset(path).rows(), 500u);
  const auto meta = nlohmann::json::parse(read_text(dir() + "d.meta.json"));
  EXPECT_EQ(meta.at("seed"), 1);
  EXPECT_FALSE(meta.contains("created"));
}

TEST(Cli, GenerateOliva) {
  const std::string path = dir() + "o.csv";
  ASSERT_EQ(run({"generate", "--model", "oliva", "--n", "1000", "--seed", "2", "--out", path}).code, 0);
  const auto d = cuspmdn::read_dataset(path);
  EXPECT_EQ(d.cols(), 7u);
  EXPECT_EQ(d.rows(), 1000u);
}

TEST(Cli, TrainEvaluatePredictExport) {
  const std::string data = dir() + "t.csv";
  ASSERT_EQ(run(generate_args("bimodal", "200", data)).code, 0);
  const std::vector<std::string> train = {"train", "--data", data, "--k", "2", "--seed", "3",
                                          "--epochs", "5", "--out", dir() + "m.json",
                                          "--report", dir() + "rep.csv"};
  const Invocation t = run(train);
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("test_mse:"), std::string::npos);
  const auto cfg = nlohmann::json::parse(read_text(dir() + "m.json.run.json"));
  EXPECT_EQ(cfg.at("network").at("k"), 2);
  EXPECT_EQ(cfg.at("train").at("epochs"), 5);
  EXPECT_TRUE(fs::exists(dir() + "rep.json"));

  const Invocation e = run({"evaluate", "--model", dir() + "m.json", "--data", data});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("delay_mse:"), std::string::npos);

  const Invocation p = run({"predict", "--model", dir() + "m.json", "--x", "0.5,-1"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(p.out.substr(0, p.out.find('\n')), "mu1,mu2,sd1,sd2,pi1,pi2");
  EXPECT_EQ(run({"predict", "--model", dir() + "m.json"}).code, 2);

  const Invocation x = run({"export-surface", "--model", dir() + "m.json", "--out", dir() + "s.csv",
                     "--cells", "3"});
  ASSERT_EQ(x.code, 0) << x.err;
  const std::string surface = read_text(dir() + "s.csv");
  EXPECT_EQ(std::count(surface.begin(), surface.end(), '\n'), 10);
  EXPECT_TRUE(fs::exists(dir() + "s.csv.run.json"));
}

TEST(Cli, RepeatRunsAreBitIdentical) {
  const std::string a = dir() + "r1.csv";
  const std::string b = dir() + "r2.csv";
  ASSERT_EQ(run(generate_args("sdecusp", "120", a)).code, 0);
  ASSERT_EQ(run(generate_args("sdecusp", "120", b)).code, 0);
  EXPECT_EQ(read_text(a), read_text(b));
  auto train = [&](const std::string& out) {
    return run({"train", "--data", a, "--k", "2", "--seed", "3", "--epochs", "4", "--out", out});
  };
  const Invocation r1 = train(dir() + "r1.json");
  const Invocation r2 = train(dir() + "r2.json");
  ASSERT_EQ(r1.code, 0);
  EXPECT_EQ(read_text(dir() + "r1.json"), read_text(dir() + "r2.json"));
  EXPECT_EQ(r1.out.substr(0, r1.out.find("wrote")), r2.out.substr(0, r2.out.find("wrote")));
}

TEST(Cli, ReproduceZeemanNeedsData) {
  EXPECT_EQ(run({"reproduce", "zeeman"}).code, 2);
}
