#pragma once

#include <string>
#include <vector>

#include "lipcert/certify.hpp"
#include "lipcert/model.hpp"
#include "lipcert/reduction.hpp"

namespace lipcert {

/// Parses {"n","m","l","w_in","b_in","w_out","b_out"}. A nonzero b_out is
/// dropped and reported through `warnings`. Errors carry ErrorCode::kParse
/// and name the source, the line/column or the offending field.
FnnModel parse_model(const std::string& text, const std::string& source,
                     std::vector<std::string>* warnings = nullptr);
FnnModel load_model(const std::string& path,
                    std::vector<std::string>* warnings = nullptr);

/// {"w0": [...]}
Vector parse_input(const std::string& text, const std::string& source);
Vector load_input(const std::string& path);

/// Round-trips every double exactly.
std::string model_to_json(const FnnModel& model);

/// Residual part in model form (b_out holds the affine offset), plus
/// "affine_gain" and a 1-based "partition".
std::string reduced_model_to_json(const ReducedModel& rm);

std::string certificate_to_json(const Certificate& cert);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace lipcert
