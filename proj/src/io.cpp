#include "coulomb/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "coulomb/error.hpp"

namespace coulomb {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InputError("not a number: '" + std::string(text) + "'");
  return v;
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) {
  for (const auto& h : header) field(h);
  end_row();
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::field(long v) { return field(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::field(std::string_view v) {
  if (row_open_) text_ += ',';
  text_ += v;
  row_open_ = true;
  return *this;
}

void CsvWriter::end_row() {
  text_ += '\n';
  row_open_ = false;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<std::string> coordinate_header(std::size_t m) {
  std::vector<std::string> h;
  for (std::size_t c = 0; c < m; ++c) h.push_back("x" + std::to_string(c));
  return h;
}

}  // namespace

std::string samples_to_csv(const Matrix& points) {
  CsvWriter csv(coordinate_header(points.cols()));
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (double v : points.row(i)) csv.field(v);
    csv.end_row();
  }
  return csv.text();
}

Matrix samples_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw InputError("sample CSV is empty");
  const auto header = split(lines.front(), ',');
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] != "x" + std::to_string(c)) throw InputError("sample CSV header must be x0,x1,...");
  Matrix out;
  std::vector<double> row(header.size());
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split(lines[l], ',');
    if (cells.size() != header.size())
      throw InputError("sample CSV line " + std::to_string(l + 1) + " has the wrong number of fields");
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_double(cells[c]);
    out.append_row(row);
  }
  return out;
}

void write_samples_csv(const std::filesystem::path& path, const Matrix& points) {
  write_file_atomic(path, samples_to_csv(points));
}

Matrix read_samples_csv(const std::filesystem::path& path) { return samples_from_csv(read_file(path)); }

std::string batch_to_csv(const Batch& batch) {
  std::vector<std::string> header{"kind"};
  for (const auto& h : coordinate_header(batch.dim())) header.push_back(h);
  CsvWriter csv(header);
  auto emit = [&](const Matrix& m, std::string_view kind) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      csv.field(kind);
      for (double v : m.row(i)) csv.field(v);
      csv.end_row();
    }
  };
  emit(batch.real, "real");
  emit(batch.generated, "generated");
  return csv.text();
}

Batch batch_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw InputError("batch CSV is empty");
  const auto header = split(lines.front(), ',');
  if (header.size() < 2 || header[0] != "kind") throw InputError("batch CSV header must be kind,x0,x1,...");
  for (std::size_t c = 1; c < header.size(); ++c)
    if (header[c] != "x" + std::to_string(c - 1)) throw InputError("batch CSV header must be kind,x0,x1,...");
  Batch batch;
  std::vector<double> row(header.size() - 1);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split(lines[l], ',');
    if (cells.size() != header.size())
      throw InputError("batch CSV line " + std::to_string(l + 1) + " has the wrong number of fields");
    for (std::size_t c = 1; c < cells.size(); ++c) row[c - 1] = parse_double(cells[c]);
    if (cells[0] == "real") {
      batch.real.append_row(row);
    } else if (cells[0] == "generated") {
      batch.generated.append_row(row);
    } else {
      throw InputError("batch CSV kind must be 'real' or 'generated', got '" + std::string(cells[0]) + "'");
    }
  }
  batch.validate();
  return batch;
}

Batch read_batch_csv(const std::filesystem::path& path) { return batch_from_csv(read_file(path)); }

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

nlohmann::json kernel_to_json(const KernelSpec& spec) {
  return {{"family", to_string(spec.family)}, {"d", spec.d}, {"epsilon", spec.epsilon}};
}

KernelSpec kernel_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("kernel must be a JSON object");
  reject_unknown_keys(doc, {"family", "d", "epsilon"}, "kernel");
  KernelSpec spec;
  try {
    if (doc.contains("family")) spec.family = parse_kernel_family(doc.at("family").get<std::string>());
    if (doc.contains("d")) spec.d = doc.at("d").get<double>();
    if (doc.contains("epsilon")) spec.epsilon = doc.at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed kernel: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json mixture_to_json(const MixtureSpec& spec) {
  nlohmann::json centers = nlohmann::json::array();
  for (std::size_t k = 0; k < spec.centers.rows(); ++k) {
    const auto row = spec.centers.row(k);
    centers.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"centers", centers}, {"component_std", spec.component_std}, {"weights", spec.weights}};
}

MixtureSpec mixture_from_json(const nlohmann::json& doc) {
  if (doc.is_string()) {
    if (doc.get<std::string>() == "grid25") return grid_mixture_25();
    throw InputError("unknown named mixture '" + doc.get<std::string>() + "'");
  }
  if (!doc.is_object()) throw InputError("mixture must be \"grid25\" or an object");
  reject_unknown_keys(doc, {"centers", "component_std", "weights"}, "mixture");
  MixtureSpec spec;
  try {
    spec.centers = Matrix::from_rows(doc.at("centers").get<std::vector<Point>>());
    spec.component_std = doc.value("component_std", 1.0);
    if (doc.contains("weights")) {
      spec.weights = doc.at("weights").get<std::vector<double>>();
    } else {
      spec.weights.assign(spec.centers.rows(), 1.0 / static_cast<double>(spec.centers.rows()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed mixture: ") + e.what());
  }
  spec.validate();
  return spec;
}

void reject_unknown_keys(const nlohmann::json& doc, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
  for (const auto& item : doc.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) throw InputError("unknown " + std::string(context) + " field '" + item.key() + "'");
  }
}

namespace {

nlohmann::json groups_to_json(const std::vector<PointGroup>& groups) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : groups) out.push_back({{"mean", g.mean}, {"std", g.std}, {"count", g.count}});
  return out;
}

std::vector<PointGroup> groups_from_json(const nlohmann::json& doc, std::string_view context) {
  if (!doc.is_array()) throw InputError(std::string(context) + " must be an array of point groups");
  std::vector<PointGroup> out;
  for (const auto& g : doc) {
    if (!g.is_object()) throw InputError(std::string(context) + " entries must be objects");
    reject_unknown_keys(g, {"mean", "std", "count"}, context);
    PointGroup group;
    group.mean = g.at("mean").get<Point>();
    if (g.contains("std")) group.std = g.at("std").get<double>();
    if (g.contains("count")) group.count = g.at("count").get<std::size_t>();
    if (group.mean.empty()) throw InputError(std::string(context) + " group needs a non-empty mean");
    if (!(group.std >= 0.0)) throw InputError(std::string(context) + " group std must be >= 0");
    out.push_back(std::move(group));
  }
  return out;
}

}  // namespace

nlohmann::json scenario_to_json(const Scenario& scenario) {
  return {{"name", scenario.name},
          {"real", groups_to_json(scenario.real)},
          {"generated", groups_to_json(scenario.generated)},
          {"kernel", kernel_to_json(scenario.kernel)},
          {"step_size", scenario.step_size},
          {"steps", scenario.steps},
          {"snapshot_every", scenario.snapshot_every}};
}

Scenario scenario_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("scenario must be a JSON object");
  reject_unknown_keys(doc, {"name", "real", "generated", "kernel", "step_size", "steps", "snapshot_every"},
                      "scenario");
  Scenario sc = two_mode_escape_scenario();
  try {
    if (doc.contains("name")) {
      const auto name = doc.at("name").get<std::string>();
      try {
        sc = named_scenario(name);
      } catch (const InputError&) {
        sc.name = name;
      }
    }
    if (doc.contains("real")) sc.real = groups_from_json(doc.at("real"), "scenario.real");
    if (doc.contains("generated")) sc.generated = groups_from_json(doc.at("generated"), "scenario.generated");
    if (doc.contains("kernel")) sc.kernel = kernel_from_json(doc.at("kernel"));
    if (doc.contains("step_size")) sc.step_size = doc.at("step_size").get<double>();
    if (doc.contains("steps")) sc.steps = doc.at("steps").get<long>();
    if (doc.contains("snapshot_every")) sc.snapshot_every = doc.at("snapshot_every").get<long>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
  if (!(sc.step_size > 0.0)) throw InputError("scenario step_size must be positive");
  if (sc.steps < 1) throw InputError("scenario steps must be >= 1");
  if (sc.snapshot_every < 1) throw InputError("scenario snapshot_every must be >= 1");
  return sc;
}

}  // namespace coulomb
