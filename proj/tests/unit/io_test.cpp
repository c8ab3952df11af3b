#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "cuspmdn/io.hpp"
#include "cuspmdn/presets.hpp"
#include "json.hpp"

using namespace cuspmdn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cuspmdn_io_test";
  fs::create_directories(dir);
  return dir / name;
}

Dataset sample(GenModel model, std::size_t n, std::uint64_t seed) {
  GenConfig g = presets::table1_config(0);
  g.model = model;
  g.n = n;
  g.seed = seed;
  return generate(g);
}

void expect_same(const Dataset& a, const Dataset& b) {
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.response, b.response);
  ASSERT_EQ(a.latent.has_value(), b.latent.has_value());
  if (a.latent) {
    EXPECT_EQ(a.latent->controls, b.latent->controls);
    EXPECT_EQ(a.latent->noiseless_root, b.latent->noiseless_root);
    EXPECT_EQ(a.latent->branch, b.latent->branch);
  }
}

MdnModel trained(std::size_t k) {
  NetworkConfig nc = presets::default_network(k);
  nc.hidden_sizes = {6, 5};
  TrainConfig tc;
  tc.epochs = 3;
  return train(sample(GenModel::BimodalRegCusp, 60, 2), nc, tc);
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    double v;
    const std::uint64_t bits = rng();
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
}

TEST(DatasetCsv, RoundTripExact) {
  for (GenModel model : {GenModel::RegCusp, GenModel::BimodalRegCusp, GenModel::SdeCusp}) {
    const Dataset d = sample(model, 3, 7);
    const fs::path path = scratch("round.csv");
    write_dataset(d, path);
    expect_same(d, read_dataset(path));
  }
  const Dataset oliva = gen_oliva(40, 1).data;
  expect_same(oliva, parse_dataset_csv(dataset_csv(oliva)));
}

TEST(DatasetCsv, HeaderLayout) {
  const std::string text = dataset_csv(sample(GenModel::BimodalRegCusp, 2, 1));
  EXPECT_EQ(text.substr(0, text.find('\n')), "x1,x2,y,alpha,beta,true_y,branch");
}

TEST(DatasetCsv, ExternalWithoutLatent) {
  const Dataset d = parse_dataset_csv("x1,x2,y\n1,2,3\n4.5,-6,7e-3\n");
  EXPECT_FALSE(d.latent);
  ASSERT_EQ(d.rows(), 2u);
  EXPECT_EQ(d.features(1, 0), 4.5);
  EXPECT_EQ(d.response[1], 7e-3);
  EXPECT_EQ(dataset_csv(d), "x1,x2,y\n1,2,3\n4.5,-6,0.007\n");
}

TEST(DatasetCsv, ToleratesCrLf) {
  const Dataset d = parse_dataset_csv("x1,y\r\n1,2\r\n");
  EXPECT_EQ(d.response.at(0), 2.0);
}

TEST(DatasetCsv, RaggedRowNamesLine) {
  try {
    parse_dataset_csv("x1,x2,y\n1,2,3\n1,2,3\n1,2,3\n1,2\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
  }
}

TEST(DatasetCsv, Errors) {
  auto line_of = [](const std::string& text) {
    try {
      parse_dataset_csv(text);
    } catch (const FormatError& e) {
      return e.line();
    }
    return std::size_t{999};
  };
  EXPECT_EQ(line_of("a,b,c\n1,2,3\n"), 1u);
  EXPECT_EQ(line_of("x1,y\n1,2\n1,abc\n"), 3u);
  EXPECT_EQ(line_of("x1,y\n1,\n"), 2u);
  EXPECT_EQ(line_of("x1,y,alpha,beta,true_y,branch\n1,2,0,0,0,7\n"), 2u);
  EXPECT_EQ(line_of("x2,y\n1,2\n"), 1u);
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_THROW(parse_dataset_csv("x1,y\n"), FormatError);
  EXPECT_THROW(read_dataset(scratch("missing.csv")), std::runtime_error);
}

TEST(Metadata, SidecarContents) {
  GenConfig g = presets::table1_config(0);
  g.n = 10;
  g.seed = 77;
  const Dataset d = generate(g);
  const fs::path csv = scratch("meta.csv");
  EXPECT_EQ(metadata_path(csv), scratch("meta.meta.json"));
  write_dataset_metadata(csv, g, d, false);
  const auto j = nlohmann::json::parse(read_text(metadata_path(csv)));
  EXPECT_EQ(j.at("generator"), "regcusp");
  EXPECT_EQ(j.at("seed"), 77u);
  EXPECT_EQ(j.at("rng"), std::string(kRngName));
  EXPECT_EQ(j.at("rows"), 10u);
  EXPECT_FALSE(j.contains("created"));
  const std::string once = read_text(metadata_path(csv));
  write_dataset_metadata(csv, g, d, false);
  EXPECT_EQ(read_text(metadata_path(csv)), once);
  write_dataset_metadata(csv, g, d, true);
  EXPECT_TRUE(nlohmann::json::parse(read_text(metadata_path(csv))).contains("created"));
}

TEST(ModelFile, RoundTripPredictsIdentically) {
  for (std::size_t k : {1u, 2u}) {
    const MdnModel m = trained(k);
    TrainConfig tc;
    tc.seed = 5;
    const fs::path path = scratch("m.json");
    save_model(m, path, &tc);
    const ModelFile back = load_model_file(path);
    ASSERT_TRUE(back.train);
    EXPECT_EQ(back.train->seed, 5u);
    std::mt19937_64 rng(k);
    std::normal_distribution<double> z(0, 3);
    for (int i = 0; i < 100; ++i) {
      const double x[] = {z(rng), z(rng)};
      EXPECT_EQ(predict(m, x), predict(back.model, x));
    }
    EXPECT_EQ(model_json(back.model, &*back.train), read_text(path));
  }
}

TEST(ModelFile, RejectsBumpedVersion) {
  auto j = nlohmann::json::parse(model_json(trained(1)));
  j["format_version"] = kModelFormatVersion + 1;
  try {
    parse_model_json(j.dump());
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported model format_version"), std::string::npos);
  }
}

TEST(ModelFile, MismatchedLayerIsNamed) {
  auto j = nlohmann::json::parse(model_json(trained(2)));
  auto& layer = j["layers"][1];
  auto w = layer["weights"];
  w.erase(w.size() - 1);
  layer["weights"] = w;
  try {
    parse_model_json(j.dump());
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find(layer["name"].get<std::string>()), std::string::npos)
        << e.what();
  }
}

TEST(ModelFile, TruncatedAndMissing) {
  const std::string text = model_json(trained(1));
  EXPECT_THROW(parse_model_json(text.substr(0, text.size() / 2)), FormatError);
  EXPECT_THROW(parse_model_json("{}"), FormatError);
  EXPECT_THROW(load_model(scratch("nope.json")), std::runtime_error);
}

TEST(Surface, GridShape) {
  const MdnModel m = trained(2);
  GridSpec g;
  g.a_cells = 2;
  g.b_cells = 2;
  const std::string csv = surface_csv(m, g);
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  EXPECT_EQ(lines, 5u);
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(header, "x1,x2,mu1,mu2,sd1,sd2,pi1,pi2");
  EXPECT_EQ(std::count(header.begin(), header.end(), ',') + 1, 3 * 2 + 2);
  const fs::path a = scratch("s1.csv");
  const fs::path b = scratch("s2.csv");
  export_surface(m, g, a);
  export_surface(m, g, b);
  EXPECT_EQ(read_text(a), read_text(b));
  g.a_cells = 0;
  EXPECT_THROW(surface_csv(m, g), std::invalid_argument);
}

TEST(Surface, HigherDimensionSlices) {
  NetworkConfig nc = presets::default_network(1);
  nc.hidden_sizes = {4};
  TrainConfig tc;
  tc.epochs = 1;
  const MdnModel m = train(gen_oliva(30, 1).data, nc, tc);
  GridSpec g;
  g.axis_a = 2;
  g.axis_b = 5;
  g.a_cells = 3;
  g.b_cells = 4;
  g.fixed.assign(7, 0.25);
  const std::string csv = surface_csv(m, g);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x3,x6,mu1,sd1,pi1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
  g.fixed.assign(3, 0.0);
  EXPECT_THROW(surface_csv(m, g), std::invalid_argument);
}

TEST(ReportFile, CsvAndJson) {
  EvalReport r;
  r.model_kind = "regcusp";
  r.k = 2;
  r.test_mse = 0.5;
  r.n_test = 1;
  r.rows = {{1.0, 0.5, 0.25}};
  EXPECT_EQ(report_rows_csv(r), "observed,fitted,squared_error\n1,0.5,0.25\n");
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j.at("k"), 2);
  EXPECT_EQ(j.at("test_mse"), 0.5);
}
