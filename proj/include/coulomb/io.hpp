#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "coulomb/field.hpp"
#include "coulomb/kernel.hpp"
#include "coulomb/matrix.hpp"
#include "coulomb/mixture.hpp"
#include "coulomb/particle_flow.hpp"
#include "json.hpp"

namespace coulomb {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

// Builds CSV text with '\n' line endings and a fixed header.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(std::string_view v);
  void end_row();

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
  bool row_open_ = false;
};

// Sample CSV: header x0,x1,...,x{m-1}; one point per row.
std::string samples_to_csv(const Matrix& points);
Matrix samples_from_csv(std::string_view text);
void write_samples_csv(const std::filesystem::path& path, const Matrix& points);
Matrix read_samples_csv(const std::filesystem::path& path);

// Batch CSV: header kind,x0,...; kind is "real" or "generated".
std::string batch_to_csv(const Batch& batch);
Batch batch_from_csv(std::string_view text);
Batch read_batch_csv(const std::filesystem::path& path);

// Writes through a temporary sibling and renames it into place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

// {"family": "plummer"|"gaussian", "d": ..., "epsilon": ...}
nlohmann::json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& doc);

// {"centers": [[...], ...], "component_std": s, "weights": [...]}; the string
// "grid25" is accepted as input for grid_mixture_25(). Weights default to uniform.
nlohmann::json mixture_to_json(const MixtureSpec& spec);
MixtureSpec mixture_from_json(const nlohmann::json& doc);

// {"name", "real": [{"mean", "std", "count"}], "generated": [...], "kernel",
// "step_size", "steps", "snapshot_every"}. Missing keys take the values of
// the two-mode-escape scenario, or of the scenario named by "name" if known.
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);

// Throws InputError naming the first key of `doc` not listed in `allowed`.
void reject_unknown_keys(const nlohmann::json& doc, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

}  // namespace coulomb
