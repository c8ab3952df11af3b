#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cuspmdn/datagen.hpp"
#include "cuspmdn/eval.hpp"
#include "cuspmdn/io.hpp"
#include "cuspmdn/mdn.hpp"
#include "cuspmdn/presets.hpp"

namespace cuspmdn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Flags shared by train and reproduce that override the pinned recipe.
struct RecipeFlags {
  std::vector<std::size_t> hidden{32, 32, 32};
  std::string activation = "relu";
  double dropout = 0.1;
  double sd_floor = 1e-3;
  std::size_t epochs = 500;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::string optimizer = "adam";

  void add_to(CLI::App& app) {
    app.add_option("--hidden", hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
    app.add_option("--activation", activation, "relu or tanh")
        ->check(CLI::IsMember({"relu", "tanh"}))
        ->capture_default_str();
    app.add_option("--dropout", dropout, "Dropout rate in [0,1)")->capture_default_str();
    app.add_option("--sd-floor", sd_floor, "Lower bound added to component scales")
        ->capture_default_str();
    app.add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app.add_option("--batch", batch, "Minibatch size")->capture_default_str();
    app.add_option("--lr", lr, "Learning rate")->capture_default_str();
    app.add_option("--optimizer", optimizer, "sgd, rmsprop or adam")
        ->check(CLI::IsMember({"sgd", "rmsprop", "adam"}))
        ->capture_default_str();
  }

  NetworkConfig network(std::size_t k) const {
    NetworkConfig nc;
    nc.hidden_sizes = hidden;
    nc.activation = parse_activation(activation);
    nc.dropout_rate = dropout;
    nc.sd_floor = sd_floor;
    nc.k = k;
    return nc;
  }

  TrainConfig training() const {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch;
    tc.learning_rate = lr;
    tc.optimizer = parse_optimizer(optimizer);
    return tc;
  }
};

json network_config_json(const NetworkConfig& nc) {
  return {{"input_dim", nc.input_dim},
          {"hidden_sizes", nc.hidden_sizes},
          {"activation", std::string(to_string(nc.activation))},
          {"dropout_rate", nc.dropout_rate},
          {"k", nc.k},
          {"sd_floor", nc.sd_floor}};
}

json train_config_json(const TrainConfig& tc) {
  return {{"epochs", tc.epochs},
          {"batch_size", tc.batch_size},
          {"learning_rate", tc.learning_rate},
          {"optimizer", std::string(to_string(tc.optimizer))},
          {"seed", tc.seed}};
}

fs::path run_config_path(const fs::path& out) {
  fs::path p = out;
  p += ".run.json";
  return p;
}

void write_run_config(const fs::path& out, const json& config) {
  write_text(run_config_path(out), config.dump(2) + "\n");
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

/// Median |mu1 - mu2| over test rows outside the cusp region.
double median_noncusp_gap(const MdnModel& two, const Dataset& test) {
  const auto preds = predict_batch(two, test.features);
  std::vector<double> gaps;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    if (!test.in_cusp_region(i)) gaps.push_back(std::abs(preds[i].means[0] - preds[i].means[1]));
  }
  return median(gaps);
}

// ---------------------------------------------------------------- generate

struct GenerateFlags {
  std::string model = "regcusp";
  std::size_t n = 500;
  std::size_t p = 2;
  std::vector<double> a;
  std::vector<double> b;
  double sigma = 1.0;
  double feature_sd = 2.0;
  std::uint64_t seed = 0;
  std::string out;
  bool no_timestamp = false;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  GenConfig cfg;
  cfg.model = parse_gen_model(f.model);
  cfg.n = f.n;
  cfg.seed = f.seed;
  cfg.noise_sd = f.sigma;
  cfg.feature_sd = f.feature_sd;
  if (cfg.model != GenModel::Oliva) {
    if (f.a.empty() != f.b.empty()) {
      throw CLI::ValidationError("--coeffs-a/--coeffs-b", "give both coefficient vectors or neither");
    }
    if (f.a.empty()) {
      cfg.p = f.p;
      cfg.coeffs = random_coeffs(f.p, f.seed);
    } else {
      cfg.coeffs = {f.a, f.b};
      if (f.a.size() < 2 || f.a.size() != f.b.size()) {
        throw CLI::ValidationError("--coeffs-a/--coeffs-b",
                                   "coefficient vectors need equal length >= 2 (intercept first)");
      }
      cfg.p = f.a.size() - 1;
    }
  }
  const Dataset d = generate(cfg);
  write_dataset(d, f.out);
  write_dataset_metadata(f.out, cfg, d, !f.no_timestamp);
  out << "rows: " << d.rows() << "\n";
  out << "features: " << d.cols() << "\n";
  out << "cusp_fraction: " << fixed(cusp_fraction(d)) << "\n";
  out << "wrote " << f.out << " and " << metadata_path(f.out).string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainFlags {
  std::string data;
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::string out;
  double split = 0.5;
  std::string report;
  RecipeFlags recipe;
};

int cmd_train(const TrainFlags& f, std::ostream& out) {
  const Dataset data = read_dataset(f.data);
  const NetworkConfig nc = f.recipe.network(f.k);
  const TrainConfig tc = f.recipe.training();
  const NetworkConfig nets[] = {nc};
  ExperimentResult r = run_on_dataset(data, "csv", nets, tc, f.seed, f.split);
  const MdnModel& model = r.models.front();
  const EvalReport& report = r.reports.front();

  TrainConfig used = tc;
  used.seed = derive_seed(f.seed, seed_tag::kTrain);
  save_model(model, f.out, &used);
  json run{{"command", "train"},
           {"data", f.data},
           {"seed", f.seed},
           {"split", f.split},
           {"network", network_config_json(model.config)},
           {"train", train_config_json(used)},
           {"n_train", report.n_train},
           {"n_test", report.n_test},
           {"train_mse", report.train_mse},
           {"test_mse", report.test_mse}};
  write_run_config(f.out, run);
  if (!f.report.empty()) write_report(report, f.report);

  out << "k: " << f.k << "\n";
  out << "n_train: " << report.n_train << "  n_test: " << report.n_test << "\n";
  out << "train_mse: " << fixed(report.train_mse) << "\n";
  out << "test_mse: " << fixed(report.test_mse) << "\n";
  out << "wrote " << f.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateFlags {
  std::string model;
  std::string data;
  std::string report;
};

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  const MdnModel m = load_model(f.model);
  const Dataset data = read_dataset(f.data);
  EvalReport report;
  report.model_kind = "csv";
  report.k = m.config.k;
  report.n_test = data.rows();
  report.rows = score_rows(m, data);
  double total = 0.0;
  for (const auto& row : report.rows) total += row.squared_error;
  report.test_mse = total / static_cast<double>(report.rows.size());
  if (!f.report.empty()) {
    write_report(report, f.report);
    write_run_config(f.report, {{"command", "evaluate"}, {"model", f.model}, {"data", f.data}});
  }
  out << "k: " << report.k << "\n";
  out << "rows: " << report.n_test << "\n";
  out << "delay_mse: " << fixed(report.test_mse) << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- predict

struct PredictFlags {
  std::string model;
  std::string data;
  std::vector<double> x;
  std::string out;
};

int cmd_predict(const PredictFlags& f, std::ostream& out) {
  const MdnModel m = load_model(f.model);
  std::vector<MixturePrediction> preds;
  if (!f.data.empty()) {
    preds = predict_batch(m, read_dataset(f.data).features);
  } else {
    preds.push_back(predict(m, f.x));
  }
  const std::string csv = predictions_csv(preds);
  if (f.out.empty()) {
    out << csv;
  } else {
    write_text(f.out, csv);
    write_run_config(f.out, {{"command", "predict"}, {"model", f.model}, {"data", f.data}, {"x", f.x}});
    out << "wrote " << preds.size() << " predictions to " << f.out << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------- export-surface

struct ExportFlags {
  std::string model;
  std::string out;
  std::size_t axis_a = 1;
  std::size_t axis_b = 2;
  std::vector<double> a_range{-4.0, 4.0};
  std::vector<double> b_range{-4.0, 4.0};
  std::size_t cells = 41;
  std::vector<double> fixed;
};

int cmd_export(const ExportFlags& f, std::ostream& out) {
  if (f.a_range.size() != 2 || f.b_range.size() != 2) {
    throw CLI::ValidationError("--a-range/--b-range", "ranges take exactly two values lo,hi");
  }
  if (f.axis_a < 1 || f.axis_b < 1) {
    throw CLI::ValidationError("--axis-a/--axis-b", "feature numbers start at 1");
  }
  const MdnModel m = load_model(f.model);
  GridSpec grid;
  grid.axis_a = f.axis_a - 1;
  grid.axis_b = f.axis_b - 1;
  grid.a_lo = f.a_range[0];
  grid.a_hi = f.a_range[1];
  grid.b_lo = f.b_range[0];
  grid.b_hi = f.b_range[1];
  grid.a_cells = f.cells;
  grid.b_cells = f.cells;
  grid.fixed = f.fixed;
  export_surface(m, grid, f.out);
  write_run_config(f.out, {{"command", "export-surface"},
                           {"model", f.model},
                           {"axis_a", f.axis_a},
                           {"axis_b", f.axis_b},
                           {"a_range", f.a_range},
                           {"b_range", f.b_range},
                           {"cells", f.cells},
                           {"fixed", f.fixed}});
  out << "wrote " << f.cells * f.cells << " grid rows to " << f.out << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- reproduce

struct ReproduceFlags {
  std::string table;
  std::uint64_t seed = presets::kDefaultSeed;
  std::optional<std::size_t> epochs;
  std::string data;
};

TrainConfig pinned_training(const ReproduceFlags& f) {
  TrainConfig tc = presets::default_training();
  if (f.epochs) tc.epochs = *f.epochs;
  return tc;
}

int reproduce_table1(const ReproduceFlags& f, std::ostream& out) {
  const NetworkConfig nets[] = {presets::default_network(1), presets::default_network(2)};
  const TrainConfig tc = pinned_training(f);
  bool all = true;
  out << "row  published_k1  achieved_k1  band_k1  published_k2  achieved_k2  band_k2\n";
  const auto& rows = presets::table1_rows();
  double row1_one = 0.0;
  double row1_two = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto reports = run_experiment(presets::table1_config(r), nets, tc, f.seed);
    const bool ok1 = presets::kTable1OneBand.contains(reports[0].test_mse);
    const bool ok2 = presets::kTable1TwoBand.contains(reports[1].test_mse);
    // Only row 1 is gated; other rows report in/out of the same bands.
    auto mark = [r](bool ok) { return r == 0 ? verdict(ok) : (ok ? "in" : "out"); };
    if (r == 0) {
      row1_one = reports[0].test_mse;
      row1_two = reports[1].test_mse;
      all = ok1 && ok2;
    }
    out << std::setw(3) << r + 1 << "  " << std::setw(12) << fixed(rows[r].mse_one) << "  "
        << std::setw(11) << fixed(reports[0].test_mse) << "  " << std::setw(7) << mark(ok1) << "  "
        << std::setw(12) << fixed(rows[r].mse_two) << "  " << std::setw(11)
        << fixed(reports[1].test_mse) << "  " << std::setw(7) << mark(ok2) << "\n";
  }
  out << "bands: k1 [" << presets::kTable1OneBand.lo << ", " << presets::kTable1OneBand.hi
      << "], k2 [" << presets::kTable1TwoBand.lo << ", " << presets::kTable1TwoBand.hi
      << "]; rows 2-5 are informational\n";
  std::size_t held = 0;
  out << "row 1 repeats (k2 <= k1 + " << presets::kTable1PairSlack << "):";
  for (std::size_t rep = 0; rep < presets::kTable1Repeats; ++rep) {
    double one = row1_one;
    double two = row1_two;
    if (rep > 0) {
      const auto reports = run_experiment(presets::table1_config(0), nets, tc, f.seed + rep);
      one = reports[0].test_mse;
      two = reports[1].test_mse;
    }
    const bool ok = two <= one + presets::kTable1PairSlack;
    held += ok ? 1 : 0;
    out << " " << fixed(two, 3) << "/" << fixed(one, 3) << (ok ? "+" : "-");
  }
  const bool repeats_ok = held >= presets::kTable1RepeatsRequired;
  out << "  -> " << held << "/" << presets::kTable1Repeats << " " << verdict(repeats_ok) << "\n";
  out << "overall: " << verdict(all && repeats_ok) << "\n";
  return kExitOk;
}

int reproduce_bimodal(const ReproduceFlags& f, std::ostream& out) {
  const NetworkConfig nets[] = {presets::bimodal_network(1), presets::bimodal_network(2)};
  const auto r = run_experiment_detailed(presets::bimodal_config(), nets, pinned_training(f), f.seed);
  const double one = r.reports[0].test_mse;
  const double two = r.reports[1].test_mse;
  const double cusp = cusp_fraction(r.test);
  const double gap = median_noncusp_gap(r.models[1], r.test);
  const bool ratio_ok = one >= presets::kBimodalMinRatio * two;
  const bool two_ok = two < presets::kBimodalMaxTwo;
  const bool cusp_ok = cusp >= presets::kBimodalMinCuspFraction;
  const bool gap_ok = gap < presets::kOverlapMaxMedianGap;
  out << "published: k1 " << presets::kBimodalPublishedOne << "  k2 " << presets::kBimodalPublishedTwo << "\n";
  out << "achieved:  k1 " << fixed(one) << "  k2 " << fixed(two) << "  ratio " << fixed(one / two, 2)
      << "\n";
  out << "cusp fraction (test) " << fixed(cusp, 3) << " >= " << presets::kBimodalMinCuspFraction
      << ": " << verdict(cusp_ok) << "\n";
  out << "k1 >= " << presets::kBimodalMinRatio << " x k2: " << verdict(ratio_ok) << "\n";
  out << "k2 < " << presets::kBimodalMaxTwo << ": " << verdict(two_ok) << "\n";
  out << "median non-cusp |mu1-mu2| " << fixed(gap) << " < " << presets::kOverlapMaxMedianGap
      << ": " << verdict(gap_ok) << "\n";
  out << "overall: " << verdict(ratio_ok && two_ok && cusp_ok && gap_ok) << "\n";
  return kExitOk;
}

int reproduce_sde(const ReproduceFlags& f, std::ostream& out) {
  const NetworkConfig nets[] = {presets::default_network(1), presets::default_network(2)};
  const auto reports = run_experiment(presets::sde_config(), nets, pinned_training(f), f.seed);
  out << "no published MSE for this setting (figures only)\n";
  out << "achieved:  k1 " << fixed(reports[0].test_mse) << "  k2 " << fixed(reports[1].test_mse)
      << "\n";
  return kExitOk;
}

int reproduce_oliva(const ReproduceFlags& f, std::ostream& out) {
  const NetworkConfig nets[] = {presets::default_network(1), presets::default_network(2)};
  const auto reports = run_experiment(presets::oliva_config(), nets, pinned_training(f), f.seed);
  const double one = reports[0].test_mse;
  const double two = reports[1].test_mse;
  const bool ok1 = presets::kOlivaOneBand.contains(one);
  const bool ok2 = presets::kOlivaTwoBand.contains(two);
  const bool order = two < one;
  out << "published: k1 " << presets::kOlivaPublishedOne << "  k2 " << presets::kOlivaPublishedTwo << "\n";
  out << "achieved:  k1 " << fixed(one) << " [" << presets::kOlivaOneBand.lo << ", "
      << presets::kOlivaOneBand.hi << "] " << verdict(ok1) << "  k2 " << fixed(two) << " ["
      << presets::kOlivaTwoBand.lo << ", " << presets::kOlivaTwoBand.hi << "] " << verdict(ok2)
      << "\n";
  out << "k2 < k1: " << verdict(order) << "\n";
  out << "overall: " << verdict(ok1 && ok2 && order) << "\n";
  return kExitOk;
}

int reproduce_zeeman(const ReproduceFlags& f, std::ostream& out) {
  if (f.data.empty()) {
    throw CLI::ValidationError("--data", "reproduce zeeman needs --data <csv with x1..xp,y>");
  }
  const Dataset data = read_dataset(f.data);
  const NetworkConfig nets[] = {presets::default_network(1), presets::default_network(2)};
  const auto r = run_on_dataset(data, "csv", nets, pinned_training(f), f.seed);
  const double one = r.reports[0].test_mse;
  const double two = r.reports[1].test_mse;
  out << "published (zeeman3): k1 " << presets::kZeemanPublishedOne << "  k2 " << presets::kZeemanPublishedTwo
      << "\n";
  out << "achieved:  k1 " << fixed(one) << "  k2 " << fixed(two) << "\n";
  out << "k2 < k1: " << verdict(two < one) << "\n";
  return kExitOk;
}

int cmd_reproduce(const ReproduceFlags& f, std::ostream& out) {
  out << "reproduce " << f.table << " (seed " << f.seed << ")\n";
  if (f.table == "table1") return reproduce_table1(f, out);
  if (f.table == "bimodal") return reproduce_bimodal(f, out);
  if (f.table == "sde") return reproduce_sde(f, out);
  if (f.table == "oliva") return reproduce_oliva(f, out);
  return reproduce_zeeman(f, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cusp catastrophe data generation and mixture density network fitting", "cusp_mdn"};
  app.require_subcommand(1);

  GenerateFlags gen;
  auto* generate_cmd = app.add_subcommand("generate", "Generate a synthetic dataset");
  generate_cmd->add_option("--model", gen.model, "regcusp, bimodal, sdecusp or oliva")
      ->check(CLI::IsMember({"regcusp", "bimodal", "sdecusp", "sde", "oliva"}))
      ->capture_default_str();
  generate_cmd->add_option("--n", gen.n, "Rows")->capture_default_str();
  generate_cmd->add_option("--p", gen.p, "Features when coefficients are drawn at random")
      ->capture_default_str();
  generate_cmd->add_option("--coeffs-a", gen.a, "alpha coefficients a0,a1,...,ap")->delimiter(',');
  generate_cmd->add_option("--coeffs-b", gen.b, "beta coefficients b0,b1,...,bp")->delimiter(',');
  generate_cmd->add_option("--sigma", gen.sigma, "Noise standard deviation")->capture_default_str();
  generate_cmd->add_option("--feature-sd", gen.feature_sd, "Feature standard deviation")
      ->capture_default_str();
  generate_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate_cmd->add_option("--out", gen.out, "Output CSV path")->required();
  generate_cmd->add_flag("--no-timestamp", gen.no_timestamp, "Omit the creation time from metadata");

  TrainFlags tr;
  auto* train_cmd = app.add_subcommand("train", "Split a dataset, train an MDN and report delay MSE");
  train_cmd->add_option("--data", tr.data, "Dataset CSV")->required();
  train_cmd->add_option("--k", tr.k, "Mixture components")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", tr.out, "Model file to write")->required();
  train_cmd->add_option("--split", tr.split, "Training fraction")->capture_default_str();
  train_cmd->add_option("--report", tr.report, "Write the test-set report CSV (plus .json summary)");
  tr.recipe.add_to(*train_cmd);

  EvaluateFlags ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Delay MSE of a saved model on a dataset");
  evaluate_cmd->add_option("--model", ev.model, "Model file")->required();
  evaluate_cmd->add_option("--data", ev.data, "Dataset CSV")->required();
  evaluate_cmd->add_option("--report", ev.report, "Write the per-row report CSV");

  PredictFlags pr;
  auto* predict_cmd = app.add_subcommand("predict", "Mixture parameters for inputs");
  predict_cmd->add_option("--model", pr.model, "Model file")->required();
  auto* pdata = predict_cmd->add_option("--data", pr.data, "Dataset CSV with inputs");
  auto* px = predict_cmd->add_option("--x", pr.x, "A single input x1,...,xp")->delimiter(',');
  pdata->excludes(px);
  predict_cmd->add_option("--out", pr.out, "Write predictions CSV here instead of stdout");

  ExportFlags ex;
  auto* export_cmd = app.add_subcommand("export-surface", "Grid of mixture parameters over two features");
  export_cmd->add_option("--model", ex.model, "Model file")->required();
  export_cmd->add_option("--out", ex.out, "Output CSV")->required();
  export_cmd->add_option("--axis-a", ex.axis_a, "First grid feature (1-based)")->capture_default_str();
  export_cmd->add_option("--axis-b", ex.axis_b, "Second grid feature (1-based)")->capture_default_str();
  export_cmd->add_option("--a-range", ex.a_range, "lo,hi for the first axis")->delimiter(',');
  export_cmd->add_option("--b-range", ex.b_range, "lo,hi for the second axis")->delimiter(',');
  export_cmd->add_option("--cells", ex.cells, "Grid points per axis")->capture_default_str();
  export_cmd->add_option("--fixed", ex.fixed, "Values for all features (axes overwritten)")
      ->delimiter(',');

  ReproduceFlags rp;
  auto* reproduce_cmd = app.add_subcommand("reproduce", "Run a pinned experiment and compare with published MSEs");
  reproduce_cmd->add_option("table", rp.table, "table1, bimodal, sde, oliva or zeeman")
      ->required()
      ->check(CLI::IsMember({"table1", "bimodal", "sde", "oliva", "zeeman"}));
  reproduce_cmd->add_option("--seed", rp.seed, "Root seed")->capture_default_str();
  reproduce_cmd->add_option("--epochs", rp.epochs, "Override the pinned epoch count");
  reproduce_cmd->add_option("--data", rp.data, "External CSV (zeeman only)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (generate_cmd->parsed()) return cmd_generate(gen, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ev, out);
    if (predict_cmd->parsed()) {
      if (pr.data.empty() && pr.x.empty()) {
        throw CLI::ValidationError("predict", "give --data or --x");
      }
      return cmd_predict(pr, out);
    }
    if (export_cmd->parsed()) return cmd_export(ex, out);
    if (reproduce_cmd->parsed()) return cmd_reproduce(rp, out);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace cuspmdn::cli
