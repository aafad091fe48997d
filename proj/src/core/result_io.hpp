#pragma once

#include <string>
#include <vector>

#include "core/inference.hpp"
#include "core/pursuit.hpp"
#include "json.hpp"

namespace ppursuit {

using Json = nlohmann::json;

inline constexpr const char* kResultSchema = "ppursuit.result/1";

Json vector_to_json(const Vector& v);
Json matrix_to_json(const Matrix& m);  // array of rows
// `path` names the field in error messages (ConfigError).
Vector vector_from_json(const Json& j, const std::string& path);
Matrix matrix_from_json(const Json& j, const std::string& path);

Json pursuit_config_to_json(const PursuitConfig& cfg);
// Fields absent from `j` keep their value in `base`. Unknown keys are errors.
PursuitConfig pursuit_config_from_json(const Json& j, const std::string& path, PursuitConfig base = {});

Json test_report_to_json(const TestReport& r);

// The full result document minus the "source" block and the optional
// analysis sections, which the caller adds.
Json pursuit_result_to_json(const PursuitResult& r);
Json copula_report_to_json(const CopulaReport& r);
Json regression_report_to_json(const RegressionReport& r);

// Rebuilds the fitted pursuit density stored in a result document.
PursuitModel model_from_result(const Json& doc);

// Empty when the document matches the schema; otherwise one message per
// problem, each prefixed with the offending path.
std::vector<std::string> validate_result(const Json& doc);

// Stable text form: two-space indent, trailing newline.
std::string dump_document(const Json& doc);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ppursuit
