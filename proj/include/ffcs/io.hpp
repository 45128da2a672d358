#pragma once

#include <string>

#include <Eigen/Dense>
#include "json.hpp"

#include "ffcs/block_signal.hpp"
#include "ffcs/fusion_frame.hpp"
#include "ffcs/measurement.hpp"
#include "ffcs/solver.hpp"

namespace ffcs {

// All files are JSON. Dense matrices are {rows, cols, entries} with entries
// row-major. Doubles are written in shortest round-trip form.

nlohmann::json frame_to_json(const FusionFrame& f);
FusionFrame frame_from_json(const nlohmann::json& j);

nlohmann::json dense_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd dense_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const MeasurementMatrix& a);
/// Non-unit columns are rescaled and flagged under Renormalize, rejected under Strict.
MeasurementMatrix matrix_from_json(const nlohmann::json& j,
                                   ColumnPolicy policy = ColumnPolicy::Renormalize);

nlohmann::json coefficients_to_json(const BlockCoefficients& c, bool with_support = true);
BlockCoefficients coefficients_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const SolveReport& r);

nlohmann::json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& j);
void write_text_file(const std::string& path, const std::string& text);

FusionFrame load_frame(const std::string& path);
MeasurementMatrix load_matrix(const std::string& path,
                              ColumnPolicy policy = ColumnPolicy::Renormalize);
Eigen::MatrixXd load_dense(const std::string& path);
BlockCoefficients load_coefficients(const std::string& path);

}  // namespace ffcs
