#include "cuspmdn/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>
#include <system_error>

#include "json.hpp"

namespace cuspmdn {

using nlohmann::json;

namespace {

constexpr std::string_view kLatentColumns[] = {"alpha", "beta", "true_y", "branch"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- datasets

std::string dataset_csv(const Dataset& d) {
  d.validate();
  std::string out;
  for (std::size_t j = 0; j < d.cols(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y";
  if (d.latent) {
    for (auto c : kLatentColumns) out += "," + std::string(c);
  }
  out += "\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (double v : d.row(i)) out += format_double(v) + ",";
    out += format_double(d.response[i]);
    if (d.latent) {
      const auto& l = *d.latent;
      out += "," + format_double(l.controls[i].alpha());
      out += "," + format_double(l.controls[i].beta());
      out += "," + format_double(l.noiseless_root[i]);
      out += "," + std::to_string(static_cast<int>(l.branch[i]));
    }
    out += "\n";
  }
  return out;
}

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto c : split_commas(line)) header.emplace_back(c);
    break;
  }
  if (header.empty()) throw FormatError("malformed header: file is empty", 1);

  std::size_t p = 0;
  while (p < header.size() && header[p] == "x" + std::to_string(p + 1)) ++p;
  if (p == 0) throw FormatError("malformed header: expected leading columns x1..xp", line_no);
  if (p >= header.size() || header[p] != "y") {
    throw FormatError("malformed header: expected column 'y' after x" + std::to_string(p), line_no);
  }
  const std::size_t rest = header.size() - p - 1;
  bool latent = false;
  if (rest == std::size(kLatentColumns)) {
    for (std::size_t c = 0; c < rest; ++c) {
      if (header[p + 1 + c] != kLatentColumns[c]) {
        throw FormatError("malformed header: unexpected column '" + header[p + 1 + c] + "'",
                          line_no);
      }
    }
    latent = true;
  } else if (rest != 0) {
    throw FormatError("malformed header: after 'y' expected nothing or alpha,beta,true_y,branch",
                      line_no);
  }

  std::vector<double> values;
  std::vector<double> response;
  LatentTruth truth;
  const std::size_t width = header.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != width) {
      throw FormatError("ragged row: expected " + std::to_string(width) + " columns, found " +
                            std::to_string(cells.size()),
                        line_no);
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_number(cells[c], row[c]) || std::isnan(row[c])) {
        throw FormatError("non-numeric cell '" + std::string(cells[c]) + "' in column '" +
                              header[c] + "'",
                          line_no);
      }
    }
    values.insert(values.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(p));
    response.push_back(row[p]);
    if (latent) {
      try {
        truth.controls.emplace_back(row[p + 1], row[p + 2]);
      } catch (const std::invalid_argument&) {
        throw FormatError("alpha and beta must be finite", line_no);
      }
      truth.noiseless_root.push_back(row[p + 3]);
      const double b = row[p + 4];
      if (b != -1.0 && b != 0.0 && b != 1.0) {
        throw FormatError("branch must be -1, 0 or 1", line_no);
      }
      truth.branch.push_back(static_cast<Branch>(static_cast<int>(b)));
    }
  }
  if (response.empty()) throw FormatError("no data rows");

  Dataset d;
  d.features = Eigen::Map<const FeatureMatrix>(values.data(),
                                               static_cast<Eigen::Index>(response.size()),
                                               static_cast<Eigen::Index>(p));
  d.response = std::move(response);
  if (latent) d.latent = std::move(truth);
  d.validate();
  return d;
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_text(path, dataset_csv(d));
}

Dataset read_dataset(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return parse_dataset_csv(text);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), 0);
  }
}

std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  std::filesystem::path out = csv;
  out.replace_extension(".meta.json");
  return out;
}

void write_dataset_metadata(const std::filesystem::path& csv, const GenConfig& cfg,
                            const Dataset& d, bool with_timestamp) {
  json meta;
  meta["generator"] = std::string(to_string(cfg.model));
  meta["seed"] = cfg.seed;
  meta["rng"] = std::string(kRngName);
  meta["rows"] = d.rows();
  meta["cusp_fraction"] = cusp_fraction(d);
  json config;
  config["n"] = cfg.n;
  if (cfg.model != GenModel::Oliva) {
    config["p"] = cfg.p;
    config["coeffs_a"] = cfg.coeffs.a;
    config["coeffs_b"] = cfg.coeffs.b;
    config["noise_sd"] = cfg.noise_sd;
    config["feature_sd"] = cfg.feature_sd;
  }
  meta["config"] = config;
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    meta["created"] = ts.str();
  }
  write_text(metadata_path(csv), meta.dump(2) + "\n");
}

// ------------------------------------------------------------------ models

namespace {

json layer_json(const std::string& name, const DenseLayer& l) {
  json j;
  j["name"] = name;
  j["rows"] = l.weights.rows();
  j["cols"] = l.weights.cols();
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(l.weights.size()));
  for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
  }
  j["weights"] = std::move(w);
  j["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
  return j;
}

DenseLayer layer_from_json(const json& j, const std::string& expected_name) {
  const std::string name = j.at("name").get<std::string>();
  if (name != expected_name) {
    throw FormatError("layer '" + name + "': expected layer '" + expected_name + "' here");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto w = j.at("weights").get<std::vector<double>>();
  const auto b = j.at("bias").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || w.size() != static_cast<std::size_t>(rows * cols) ||
      b.size() != static_cast<std::size_t>(rows)) {
    throw FormatError("layer '" + name + "': declared " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " but holds " + std::to_string(w.size()) +
                      " weights and " + std::to_string(b.size()) + " biases");
  }
  DenseLayer l;
  l.weights.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
  }
  l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
  return l;
}

json network_json(const NetworkConfig& nc) {
  return {{"input_dim", nc.input_dim},
          {"hidden_sizes", nc.hidden_sizes},
          {"activation", std::string(to_string(nc.activation))},
          {"dropout_rate", nc.dropout_rate},
          {"k", nc.k},
          {"sd_floor", nc.sd_floor}};
}

json train_json(const TrainConfig& tc) {
  return {{"epochs", tc.epochs},
          {"batch_size", tc.batch_size},
          {"learning_rate", tc.learning_rate},
          {"optimizer", std::string(to_string(tc.optimizer))},
          {"seed", tc.seed}};
}

}  // namespace

std::string model_json(const MdnModel& m, const TrainConfig* train) {
  m.validate();
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["network"] = network_json(m.config);
  doc["train"] = train ? train_json(*train) : json(nullptr);
  doc["standardizer"] = {{"mean", m.standardizer.mean}, {"sd", m.standardizer.sd}};
  json layers = json::array();
  for (std::size_t i = 0; i < m.params.hidden.size(); ++i) {
    layers.push_back(layer_json("hidden" + std::to_string(i), m.params.hidden[i]));
  }
  layers.push_back(layer_json("mean_head", m.params.mean_head));
  layers.push_back(layer_json("scale_head", m.params.scale_head));
  layers.push_back(layer_json("weight_head", m.params.weight_head));
  doc["layers"] = std::move(layers);
  return doc.dump(1) + "\n";
}

ModelFile parse_model_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("truncated or malformed model file: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("unsupported model format_version " + std::to_string(version) +
                        " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    }
    ModelFile file;
    MdnModel& m = file.model;
    const json& net = doc.at("network");
    m.config.input_dim = net.at("input_dim").get<std::size_t>();
    m.config.hidden_sizes = net.at("hidden_sizes").get<std::vector<std::size_t>>();
    m.config.activation = parse_activation(net.at("activation").get<std::string>());
    m.config.dropout_rate = net.at("dropout_rate").get<double>();
    m.config.k = net.at("k").get<std::size_t>();
    m.config.sd_floor = net.at("sd_floor").get<double>();

    const json& train = doc.at("train");
    if (!train.is_null()) {
      TrainConfig tc;
      tc.epochs = train.at("epochs").get<std::size_t>();
      tc.batch_size = train.at("batch_size").get<std::size_t>();
      tc.learning_rate = train.at("learning_rate").get<double>();
      tc.optimizer = parse_optimizer(train.at("optimizer").get<std::string>());
      tc.seed = train.at("seed").get<std::uint64_t>();
      file.train = tc;
    }

    m.standardizer.mean = doc.at("standardizer").at("mean").get<std::vector<double>>();
    m.standardizer.sd = doc.at("standardizer").at("sd").get<std::vector<double>>();

    const json& layers = doc.at("layers");
    const std::size_t hidden = m.config.hidden_sizes.size();
    if (!layers.is_array() || layers.size() != hidden + 3) {
      throw FormatError("expected " + std::to_string(hidden + 3) + " layers, found " +
                        std::to_string(layers.size()));
    }
    for (std::size_t i = 0; i < hidden; ++i) {
      m.params.hidden.push_back(layer_from_json(layers[i], "hidden" + std::to_string(i)));
    }
    m.params.mean_head = layer_from_json(layers[hidden], "mean_head");
    m.params.scale_head = layer_from_json(layers[hidden + 1], "scale_head");
    m.params.weight_head = layer_from_json(layers[hidden + 2], "weight_head");
    m.validate();
    return file;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("inconsistent model file: ") + e.what());
  }
}

void save_model(const MdnModel& m, const std::filesystem::path& path, const TrainConfig* train) {
  write_text(path, model_json(m, train));
}

ModelFile load_model_file(const std::filesystem::path& path) {
  return parse_model_json(read_text(path));
}

MdnModel load_model(const std::filesystem::path& path) { return load_model_file(path).model; }

// ----------------------------------------------------------------- exports

namespace {

std::string mixture_header(std::size_t k) {
  std::string out;
  for (const char* prefix : {"mu", "sd", "pi"}) {
    for (std::size_t i = 1; i <= k; ++i) out += "," + std::string(prefix) + std::to_string(i);
  }
  return out;
}

void append_mixture(std::string& out, const MixturePrediction& p) {
  for (double v : p.means) out += "," + format_double(v);
  for (double v : p.sds) out += "," + format_double(v);
  for (double v : p.weights) out += "," + format_double(v);
}

}  // namespace

std::string surface_csv(const MdnModel& m, const GridSpec& grid) {
  const std::size_t d = m.config.input_dim;
  if (grid.a_cells == 0 || grid.b_cells == 0) throw std::invalid_argument("export_surface: grid has zero cells");
  if (grid.axis_a >= d || grid.axis_b >= d || grid.axis_a == grid.axis_b) {
    throw std::invalid_argument("export_surface: axes must be two distinct features below " +
                                std::to_string(d));
  }
  std::vector<double> base = grid.fixed.empty() ? m.standardizer.mean : grid.fixed;
  if (base.size() != d) {
    throw std::invalid_argument("export_surface: fixed values must cover all " + std::to_string(d) +
                                " features");
  }
  auto coord = [](double lo, double hi, std::size_t cells, std::size_t i) {
    return cells == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells - 1);
  };
  std::string out = "x" + std::to_string(grid.axis_a + 1) + ",x" + std::to_string(grid.axis_b + 1) +
                    mixture_header(m.config.k) + "\n";
  for (std::size_t i = 0; i < grid.a_cells; ++i) {
    for (std::size_t j = 0; j < grid.b_cells; ++j) {
      std::vector<double> x = base;
      x[grid.axis_a] = coord(grid.a_lo, grid.a_hi, grid.a_cells, i);
      x[grid.axis_b] = coord(grid.b_lo, grid.b_hi, grid.b_cells, j);
      out += format_double(x[grid.axis_a]) + "," + format_double(x[grid.axis_b]);
      append_mixture(out, predict(m, x));
      out += "\n";
    }
  }
  return out;
}

void export_surface(const MdnModel& m, const GridSpec& grid, const std::filesystem::path& path) {
  write_text(path, surface_csv(m, grid));
}

std::string predictions_csv(const std::vector<MixturePrediction>& preds) {
  if (preds.empty()) return {};
  std::string out = mixture_header(preds.front().k()).substr(1) + "\n";
  for (const auto& p : preds) {
    std::string row;
    append_mixture(row, p);
    out += row.substr(1) + "\n";
  }
  return out;
}

std::string report_rows_csv(const EvalReport& r) {
  std::string out = "observed,fitted,squared_error\n";
  for (const auto& row : r.rows) {
    out += format_double(row.observed) + "," + format_double(row.fitted) + "," +
           format_double(row.squared_error) + "\n";
  }
  return out;
}

std::string report_json(const EvalReport& r) {
  json j{{"model_kind", r.model_kind}, {"k", r.k},           {"train_mse", r.train_mse},
         {"test_mse", r.test_mse},     {"n_train", r.n_train}, {"n_test", r.n_test}};
  return j.dump(2) + "\n";
}

void write_report(const EvalReport& r, const std::filesystem::path& csv_path) {
  write_text(csv_path, report_rows_csv(r));
  std::filesystem::path summary = csv_path;
  summary.replace_extension(".json");
  write_text(summary, report_json(r));
}

}  // namespace cuspmdn
