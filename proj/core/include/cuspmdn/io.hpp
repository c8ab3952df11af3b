#pragma once

// File formats.
//
// Dataset CSV: header `x1,...,xp,y` optionally followed by
// `alpha,beta,true_y,branch` (branch is -1 lower, 0 single, 1 upper). Values
// use the shortest decimal text that round-trips a double. Generator metadata
// lives in a sidecar `<stem>.meta.json`.
//
// Model file: JSON with format_version, network and train configs, the
// standardizer and one entry per layer holding row-major weights and biases.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuspmdn/datagen.hpp"
#include "cuspmdn/eval.hpp"
#include "cuspmdn/mdn.hpp"

namespace cuspmdn {

class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  /// 1-based line of the offending input, 0 when not line-specific.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline constexpr int kModelFormatVersion = 1;

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

std::string dataset_csv(const Dataset& d);
Dataset parse_dataset_csv(const std::string& text);
void write_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

/// `data/d.csv` -> `data/d.meta.json`.
std::filesystem::path metadata_path(const std::filesystem::path& csv);
/// Records generator kind, seed, RNG and config. `with_timestamp` adds a
/// creation time; leave it off for byte-stable output.
void write_dataset_metadata(const std::filesystem::path& csv, const GenConfig& cfg,
                            const Dataset& d, bool with_timestamp);

struct ModelFile {
  MdnModel model;
  std::optional<TrainConfig> train;
};

std::string model_json(const MdnModel& m, const TrainConfig* train = nullptr);
ModelFile parse_model_json(const std::string& text);
void save_model(const MdnModel& m, const std::filesystem::path& path,
                const TrainConfig* train = nullptr);
ModelFile load_model_file(const std::filesystem::path& path);
MdnModel load_model(const std::filesystem::path& path);

/// Regular grid over two input features. Features other than the two axes
/// are held at `fixed` (raw units); when `fixed` is empty they sit at the
/// training means stored in the standardizer.
struct GridSpec {
  std::size_t axis_a = 0;
  std::size_t axis_b = 1;
  double a_lo = -1.0;
  double a_hi = 1.0;
  std::size_t a_cells = 21;
  double b_lo = -1.0;
  double b_hi = 1.0;
  std::size_t b_cells = 21;
  std::vector<double> fixed;
};

/// Columns: the two axis features, then mu1..muk, sd1..sdk, pi1..pik.
std::string surface_csv(const MdnModel& m, const GridSpec& grid);
void export_surface(const MdnModel& m, const GridSpec& grid, const std::filesystem::path& path);

/// One row per input: mu1..muk, sd1..sdk, pi1..pik.
std::string predictions_csv(const std::vector<MixturePrediction>& preds);

/// Per-row CSV (observed, fitted, squared_error) and a JSON summary.
std::string report_rows_csv(const EvalReport& r);
std::string report_json(const EvalReport& r);
void write_report(const EvalReport& r, const std::filesystem::path& csv_path);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_text(const std::filesystem::path& path);
/// Writes a whole file; throws std::runtime_error on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cuspmdn
