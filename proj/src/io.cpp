#include "ffcs/io.hpp"

#include <fstream>
#include <sstream>

#include "ffcs/errors.hpp"

namespace ffcs {

using nlohmann::json;

namespace {

std::vector<double> flat_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Eigen::MatrixXd from_flat(const json& arr, Eigen::Index rows, Eigen::Index cols,
                          const std::string& what) {
  if (!arr.is_array()) throw IoError(what + ": expected an array");
  if (static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw ShapeError(what + ": expected " + std::to_string(rows * cols) + " entries, got " +
                     std::to_string(arr.size()));
  Eigen::MatrixXd m(rows, cols);
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr.at(p++).get<double>();
  return m;
}

template <typename T>
T field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw IoError(what + ": missing field '" + std::string(key) + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(what + ": bad field '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace

json frame_to_json(const FusionFrame& f) {
  json subs = json::array();
  for (const auto& s : f.subspaces())
    subs.push_back({{"dim", s.dim()}, {"basis", flat_row_major(s.basis())}});
  return {{"ambient_dim", f.ambient_dim()}, {"subspaces", subs}, {"weights", f.weights()}};
}

FusionFrame frame_from_json(const json& j) {
  const auto M = field<Eigen::Index>(j, "ambient_dim", "frame");
  const auto subs = field<json>(j, "subspaces", "frame");
  if (!subs.is_array()) throw IoError("frame: 'subspaces' must be an array");
  std::vector<SubspaceBasis> bases;
  for (const auto& s : subs) {
    const auto m = field<Eigen::Index>(s, "dim", "subspace");
    if (M < 1 || m < 1) throw DimensionError("frame: dimensions must be positive");
    bases.emplace_back(from_flat(field<json>(s, "basis", "subspace"), M, m, "subspace basis"));
  }
  if (j.contains("weights") && !j.at("weights").is_null())
    return FusionFrame(std::move(bases), field<std::vector<double>>(j, "weights", "frame"));
  return FusionFrame(std::move(bases));
}

json dense_to_json(const Eigen::MatrixXd& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", flat_row_major(m)}};
}

Eigen::MatrixXd dense_from_json(const json& j) {
  const auto rows = field<Eigen::Index>(j, "rows", "matrix");
  const auto cols = field<Eigen::Index>(j, "cols", "matrix");
  if (rows < 0 || cols < 0) throw ShapeError("matrix: negative dimensions");
  return from_flat(field<json>(j, "entries", "matrix"), rows, cols, "matrix entries");
}

json matrix_to_json(const MeasurementMatrix& a) { return dense_to_json(a.entries()); }

MeasurementMatrix matrix_from_json(const json& j, ColumnPolicy policy) {
  return MeasurementMatrix(dense_from_json(j), policy);
}

json coefficients_to_json(const BlockCoefficients& c, bool with_support) {
  json blocks = json::array();
  for (const auto& b : c.blocks()) blocks.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  json out = {{"blocks", blocks}};
  if (with_support) out["support"] = c.support().indices();
  return out;
}

BlockCoefficients coefficients_from_json(const json& j) {
  const auto blocks = field<std::vector<std::vector<double>>>(j, "blocks", "coefficients");
  std::vector<Eigen::VectorXd> out;
  for (const auto& b : blocks)
    out.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
  return BlockCoefficients(std::move(out));
}

json report_to_json(const SolveReport& r) {
  json out = {{"status", to_string(r.status)},
              {"iterations", r.iterations},
              {"final_feasibility_residual", r.final_feasibility_residual},
              {"final_objective", r.final_objective},
              {"certificate_residual", r.certificate_residual},
              {"support", r.coefficients.support().indices()}};
  if (!r.optimal_supports.empty()) {
    json sups = json::array();
    for (const auto& s : r.optimal_supports) sups.push_back(s.indices());
    out["optimal_supports"] = sups;
    out["unique"] = r.unique;
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

FusionFrame load_frame(const std::string& path) { return frame_from_json(read_json_file(path)); }

MeasurementMatrix load_matrix(const std::string& path, ColumnPolicy policy) {
  return matrix_from_json(read_json_file(path), policy);
}

Eigen::MatrixXd load_dense(const std::string& path) { return dense_from_json(read_json_file(path)); }

BlockCoefficients load_coefficients(const std::string& path) {
  return coefficients_from_json(read_json_file(path));
}

}  // namespace ffcs
