#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/grid.hpp"
#include "core/inference.hpp"
#include "core/models.hpp"
#include "core/pursuit.hpp"
#include "core/result_io.hpp"

namespace ppursuit {

enum class Analysis { kPursuit, kCopula, kRegression, kDeconvolution };

const char* analysis_name(Analysis a);
Analysis analysis_from_name(const std::string& name);

struct ScenarioConfig {
  std::string name;
  std::string description;  // how the generator realizes the scenario
  ScenarioDistribution distribution = ScenarioDistribution::normal(0.0, 1.0);
  int n = 0;  // total sample size, outliers included
  PursuitConfig pursuit;
  std::vector<Vector> outliers;
  Analysis analysis = Analysis::kPursuit;
  // Direction tested for membership in the level-1 confidence region.
  std::optional<Vector> hypothesis;
  std::optional<GridSpec> grid;
  RegressionOptions regression;
  std::string output_dir = ".";

  int dim() const { return distribution.dim(); }
  // ConfigError with the offending field path.
  void validate() const;
};

std::vector<std::string> builtin_scenario_names();
// d <= 0 keeps the scenario's default dimension; only sim42 accepts another.
ScenarioConfig builtin_scenario(const std::string& name, int d = 0);

Json distribution_to_json(const ScenarioDistribution& dist);
ScenarioDistribution distribution_from_json(const Json& j, const std::string& path);

Json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const Json& j, const std::string& path);
// Axes 0 and 1 over mean +- 3 sd of the base model.
GridSpec model_grid(const EllipticalModel& base, int count = 41);

Json scenario_to_json(const ScenarioConfig& cfg);
// A "base" key starts from a built-in scenario; other keys override it.
ScenarioConfig scenario_from_json(const Json& j);
ScenarioConfig load_scenario(const std::string& name_or_path);

// Draws n - #outliers points and appends the outliers.
Matrix scenario_data(const ScenarioConfig& cfg);

struct AnalysisRequest {
  std::string source_kind = "csv";  // "scenario" or "csv"
  std::string source_name;
  Json generator;  // null for user data
  Analysis analysis = Analysis::kPursuit;
  PursuitConfig pursuit;
  std::optional<Vector> hypothesis;
  std::optional<GridSpec> grid;
  RegressionOptions regression;
  std::string output_dir = ".";
};

struct RunArtifacts {
  std::string result_file;
  std::vector<std::string> density_grid_files;
  std::string log;
  Json document;
};

// Writes result.json, one density grid per level and run.log into the
// output directory. On failure the partial result and the log are still
// written and the error is rethrown.
RunArtifacts run_analysis(const Matrix& data, const AnalysisRequest& request);
RunArtifacts run_scenario(const ScenarioConfig& cfg);

// Grid of sup-norm gaps |g_k - KDE of the data| for k = 0..K.
std::vector<double> deconvolution_gaps(const PursuitModel& model, const Matrix& data, const GridSpec& grid);

}  // namespace ppursuit
