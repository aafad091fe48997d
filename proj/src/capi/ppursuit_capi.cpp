#include "ppursuit/ppursuit.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/grid.hpp"
#include "core/pursuit.hpp"
#include "core/result_io.hpp"
#include "core/scenario.hpp"

using namespace ppursuit;

struct ppursuit_matrix {
  Matrix m;
};

struct ppursuit_config {
  PursuitConfig cfg;
};

struct ppursuit_result {
  PursuitResult r;
};

struct ppursuit_artifacts {
  RunArtifacts a;
};

namespace {

thread_local std::string last_error;

int status_of(ErrorCode code) { return static_cast<int>(code) + 1; }

int set_error(int status, const std::string& msg) {
  last_error = msg;
  return status;
}

template <typename F>
int guard(F&& body) {
  try {
    last_error.clear();
    body();
    return PPURSUIT_OK;
  } catch (const Error& e) {
    return set_error(status_of(e.code()), std::string(error_code_name(e.code())) + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(PPURSUIT_E_CONFIG, std::string("ConfigError: ") + e.what());
  } catch (const std::bad_alloc&) {
    return set_error(PPURSUIT_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(PPURSUIT_E_INTERNAL, std::string("internal error: ") + e.what());
  } catch (...) {
    return set_error(PPURSUIT_E_INTERNAL, "internal error");
  }
}

void need(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::kParam, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Json parse_or_empty(const char* json) {
  if (!json || !*json) return Json::object();
  Json j;
  try {
    j = Json::parse(json);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kConfig, "expected a JSON object");
  return j;
}

CsvOptions csv_options(const Json& j) {
  CsvOptions o;
  if (!j.is_object()) fail(ErrorCode::kConfig, "csv: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "delimiter") {
      const auto s = value.get<std::string>();
      if (s.size() != 1) fail(ErrorCode::kConfig, "csv.delimiter: expected one character");
      o.delimiter = s[0];
    } else if (key == "header") {
      o.header = value.get<bool>();
    } else if (key == "columns") {
      for (const auto& c : value) {
        if (c.is_string()) o.column_names.push_back(c.get<std::string>());
        else o.columns.push_back(c.get<int>());
      }
    } else {
      fail(ErrorCode::kConfig, "csv." + key + ": unknown key");
    }
  }
  return o;
}

}  // namespace

extern "C" {

const char* ppursuit_version(void) { return "0.1.0"; }

const char* ppursuit_last_error(void) { return last_error.c_str(); }

const char* ppursuit_status_name(int status) {
  if (status == PPURSUIT_OK) return "Ok";
  if (status == PPURSUIT_E_NULL_ARGUMENT) return "NullArgument";
  if (status == PPURSUIT_E_INTERNAL) return "InternalError";
  if (status >= 1 && status <= PPURSUIT_E_IO) return error_code_name(static_cast<ErrorCode>(status - 1));
  return "UnknownStatus";
}

int ppursuit_status_is_config_error(int status) {
  switch (status) {
    case PPURSUIT_E_PARAM:
    case PPURSUIT_E_DIMENSION_MISMATCH:
    case PPURSUIT_E_PARSE:
    case PPURSUIT_E_EMPTY_DATA:
    case PPURSUIT_E_CONFIG:
    case PPURSUIT_E_IO:
    case PPURSUIT_E_NULL_ARGUMENT:
      return 1;
    default:
      return 0;
  }
}

void ppursuit_string_free(char* s) { std::free(s); }

int ppursuit_matrix_create(size_t rows, size_t cols, const double* values, ppursuit_matrix** out) {
  if (!out || (!values && rows * cols > 0)) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    auto h = std::make_unique<ppursuit_matrix>();
    h->m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < cols; ++j)
        h->m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
    *out = h.release();
  });
}

int ppursuit_matrix_read_csv(const char* path, char delimiter, int has_header, ppursuit_matrix** out) {
  if (!path || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    CsvOptions o;
    o.delimiter = delimiter;
    o.header = has_header != 0;
    auto h = std::make_unique<ppursuit_matrix>();
    h->m = read_csv_file(path, o).data;
    *out = h.release();
  });
}

int ppursuit_matrix_write_csv(const ppursuit_matrix* m, const char* path) {
  if (!m || !path) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  return guard([&] {
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < m->m.cols(); ++j) names.push_back("x" + std::to_string(j));
    write_csv_file(path, m->m, names);
  });
}

size_t ppursuit_matrix_rows(const ppursuit_matrix* m) { return m ? static_cast<size_t>(m->m.rows()) : 0; }
size_t ppursuit_matrix_cols(const ppursuit_matrix* m) { return m ? static_cast<size_t>(m->m.cols()) : 0; }

int ppursuit_matrix_copy(const ppursuit_matrix* m, double* out, size_t len) {
  if (!m || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  return guard([&] {
    const auto rows = static_cast<size_t>(m->m.rows());
    const auto cols = static_cast<size_t>(m->m.cols());
    if (len < rows * cols) fail(ErrorCode::kDimensionMismatch, "output buffer too small");
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < cols; ++j) out[i * cols + j] = m->m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  });
}

void ppursuit_matrix_free(ppursuit_matrix* m) { delete m; }

int ppursuit_config_create(ppursuit_config** out) {
  if (!out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = new ppursuit_config(); });
}

int ppursuit_config_merge_json(ppursuit_config* cfg, const char* json) {
  if (!cfg || !json) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  return guard([&] { cfg->cfg = pursuit_config_from_json(parse_or_empty(json), "config", cfg->cfg); });
}

int ppursuit_config_to_json(const ppursuit_config* cfg, char** out) {
  if (!cfg || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = dup_string(pursuit_config_to_json(cfg->cfg).dump(2)); });
}

void ppursuit_config_free(ppursuit_config* cfg) { delete cfg; }

int ppursuit_pursue(const ppursuit_matrix* data, const ppursuit_config* cfg, ppursuit_result** out) {
  if (!data || !cfg || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = new ppursuit_result{run_pursuit(data->m, cfg->cfg)}; });
}

int ppursuit_result_levels(const ppursuit_result* r) { return r ? r->r.model.k() : -1; }
int ppursuit_result_accepted(const ppursuit_result* r) { return r ? static_cast<int>(r->r.accepted) : -1; }

int ppursuit_result_direction(const ppursuit_result* r, int level, double* out, size_t len) {
  if (!r || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  return guard([&] {
    if (level < 1 || level > r->r.model.k()) fail(ErrorCode::kParam, "level out of range");
    const Vector& a = r->r.model.levels()[static_cast<size_t>(level - 1)].direction;
    if (len < static_cast<size_t>(a.size())) fail(ErrorCode::kDimensionMismatch, "output buffer too small");
    for (Eigen::Index i = 0; i < a.size(); ++i) out[i] = a(i);
  });
}

int ppursuit_result_estimate(const ppursuit_result* r, int level, double* estimate, double* statistic,
                             int* accept_h0) {
  if (!r) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  return guard([&] {
    if (level < 0 || level >= static_cast<int>(r->r.trace.size())) fail(ErrorCode::kParam, "level out of range");
    const auto k = static_cast<size_t>(level);
    if (estimate) *estimate = r->r.trace[k];
    if (statistic) *statistic = r->r.reports[k].statistic;
    if (accept_h0) *accept_h0 = r->r.reports[k].accept_h0 ? 1 : 0;
  });
}

int ppursuit_result_density(const ppursuit_result* r, int level, const double* x, size_t d, double* out) {
  if (!r || !x || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  return guard([&] {
    if (d != static_cast<size_t>(r->r.model.dim())) fail(ErrorCode::kDimensionMismatch, "point dimension does not match model");
    if (level < 0 || level > r->r.model.k()) fail(ErrorCode::kParam, "level out of range");
    *out = eval_gk(r->r.model.prefix(level), Eigen::Map<const Vector>(x, static_cast<Eigen::Index>(d)));
  });
}

int ppursuit_result_to_json(const ppursuit_result* r, char** out) {
  if (!r || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = dup_string(dump_document(pursuit_result_to_json(r->r))); });
}

void ppursuit_result_free(ppursuit_result* r) { delete r; }

int ppursuit_simulate(const char* name_or_path, const char* overrides_json, const char* output_dir,
                      ppursuit_artifacts** out) {
  if (!name_or_path || !output_dir || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    const Json overrides = parse_or_empty(overrides_json);
    Json j;
    const auto names = builtin_scenario_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
      j = {{"base", name_or_path}};
    } else {
      if (!std::filesystem::exists(name_or_path))
        fail(ErrorCode::kConfig, std::string("scenario: '") + name_or_path + "' is neither a scenario nor a file");
      j = read_json_file(name_or_path);
    }
    for (const auto& [key, value] : overrides.items()) {
      if (key == "pursuit") {
        if (!j.contains("pursuit")) j["pursuit"] = Json::object();
        j["pursuit"].merge_patch(value);
      } else if (key == "n" || key == "d") {
        j[key] = value;
      } else {
        fail(ErrorCode::kConfig, "overrides." + key + ": unknown key");
      }
    }
    ScenarioConfig cfg = scenario_from_json(j);
    cfg.output_dir = output_dir;
    auto h = std::make_unique<ppursuit_artifacts>();
    try {
      h->a = run_scenario(cfg);
    } catch (...) {
      h->a.result_file = (std::filesystem::path(output_dir) / "result.json").string();
      h->a.log = (std::filesystem::path(output_dir) / "run.log").string();
      *out = h.release();
      throw;
    }
    *out = h.release();
  });
}

int ppursuit_analyze_csv(const char* csv_path, const char* request_json, const char* output_dir,
                         ppursuit_artifacts** out) {
  if (!csv_path || !output_dir || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    const Json j = parse_or_empty(request_json);
    AnalysisRequest req;
    req.source_kind = "csv";
    req.source_name = std::filesystem::path(csv_path).filename().string();
    req.output_dir = output_dir;
    CsvOptions csv;
    for (const auto& [key, value] : j.items()) {
      if (key == "analysis") req.analysis = analysis_from_name(value.get<std::string>());
      else if (key == "pursuit") req.pursuit = pursuit_config_from_json(value, "pursuit", req.pursuit);
      else if (key == "csv") csv = csv_options(value);
      else if (key == "grid") req.grid = grid_from_json(value, "grid");
      else if (key == "regression") {
        for (const auto& [rk, rv] : value.items()) {
          if (rk == "response") req.regression.response = rv.get<int>();
          else if (rk == "predictor") req.regression.predictor = rv.get<int>();
          else if (rk == "tolerance_deg") req.regression.tolerance_deg = rv.get<double>();
          else fail(ErrorCode::kConfig, "regression." + rk + ": unknown key");
        }
      } else if (key == "hypothesis") req.hypothesis = vector_from_json(value, "hypothesis");
      else fail(ErrorCode::kConfig, key + ": unknown key");
    }
    const Matrix data = read_csv_file(csv_path, csv).data;
    req.regression.seed = req.pursuit.seed;
    auto h = std::make_unique<ppursuit_artifacts>();
    try {
      h->a = run_analysis(data, req);
    } catch (...) {
      h->a.result_file = (std::filesystem::path(output_dir) / "result.json").string();
      h->a.log = (std::filesystem::path(output_dir) / "run.log").string();
      *out = h.release();
      throw;
    }
    *out = h.release();
  });
}

const char* ppursuit_artifacts_result_file(const ppursuit_artifacts* a) { return a ? a->a.result_file.c_str() : ""; }
const char* ppursuit_artifacts_log(const ppursuit_artifacts* a) { return a ? a->a.log.c_str() : ""; }
size_t ppursuit_artifacts_grid_count(const ppursuit_artifacts* a) { return a ? a->a.density_grid_files.size() : 0; }

const char* ppursuit_artifacts_grid_file(const ppursuit_artifacts* a, size_t i) {
  if (!a || i >= a->a.density_grid_files.size()) return "";
  return a->a.density_grid_files[i].c_str();
}

int ppursuit_artifacts_document(const ppursuit_artifacts* a, char** out) {
  if (!a || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = dup_string(dump_document(a->a.document)); });
}

void ppursuit_artifacts_free(ppursuit_artifacts* a) { delete a; }

int ppursuit_emit_grid(const char* result_path, const char* grid_json, int level, const char* output_path) {
  if (!result_path || !output_path) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  return guard([&] {
    const PursuitModel model = model_from_result(read_json_file(result_path));
    const GridSpec grid = (grid_json && *grid_json) ? grid_from_json(parse_or_empty(grid_json), "grid")
                                                    : model_grid(model.base());
    if (level > model.k()) fail(ErrorCode::kParam, "result has only " + std::to_string(model.k()) + " levels");
    emit_density_grid(level < 0 ? model : model.prefix(level), grid, output_path);
  });
}

int ppursuit_validate_result_file(const char* result_path, char** problems) {
  if (!result_path || !problems) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *problems = nullptr;
  return guard([&] {
    std::string text;
    for (const auto& p : validate_result(read_json_file(result_path))) text += p + "\n";
    *problems = dup_string(text);
  });
}

int ppursuit_scenario_names(char** out) {
  if (!out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    std::string text;
    for (const auto& n : builtin_scenario_names()) text += n + "\n";
    *out = dup_string(text);
  });
}

int ppursuit_scenario_json(const char* name, char** out) {
  if (!name || !out) return set_error(PPURSUIT_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = dup_string(dump_document(scenario_to_json(builtin_scenario(name)))); });
}

}  // extern "C"
