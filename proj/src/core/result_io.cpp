#include "core/result_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ppursuit {

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::kConfig, path + ": " + what);
}

double number_at(const Json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  return j.get<double>();
}

int int_at(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) config_error(path, "expected an integer");
  return j.get<int>();
}

bool bool_at(const Json& j, const std::string& path) {
  if (!j.is_boolean()) config_error(path, "expected true or false");
  return j.get<bool>();
}

Json anneal_to_json(const AnnealConfig& a) {
  return {{"steps", a.steps},
          {"restarts", a.restarts},
          {"initial_temperature", a.initial_temperature},
          {"cooling_factor", a.cooling_factor},
          {"proposal_stddev", a.proposal_stddev},
          {"seed", a.seed}};
}

AnnealConfig anneal_from_json(const Json& j, const std::string& path, AnnealConfig a) {
  if (!j.is_object()) config_error(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string p = path + "." + key;
    if (key == "steps") a.steps = int_at(value, p);
    else if (key == "restarts") a.restarts = int_at(value, p);
    else if (key == "initial_temperature") a.initial_temperature = number_at(value, p);
    else if (key == "cooling_factor") a.cooling_factor = number_at(value, p);
    else if (key == "proposal_stddev") a.proposal_stddev = number_at(value, p);
    else if (key == "seed") {
      if (!value.is_number_unsigned()) config_error(p, "expected a non-negative integer");
      a.seed = value.get<std::uint64_t>();
    } else config_error(p, "unknown key");
  }
  return a;
}

Json diagnostics_to_json(const LevelDiagnostics& d) {
  return {{"instrumental_size", d.instrumental_size},
          {"retained_x", d.retained_x},
          {"retained_y", d.retained_y},
          {"paired_n", d.paired_n},
          {"masked_x", d.masked_x},
          {"masked_y", d.masked_y},
          {"theta", d.theta},
          {"numerator_bandwidth", d.numerator_bandwidth},
          {"denominator_scott_bandwidth", d.denominator_scott_bandwidth},
          {"ess", d.ess},
          {"proposals", d.proposals},
          {"anneal_value", d.anneal_value},
          {"anneal_evaluations", d.anneal_evaluations},
          {"test_estimate", d.test_estimate},
          {"test_c_direction", vector_to_json(d.test_c_direction)}};
}

Json kde_to_json(const Kde1d& k) { return {{"bandwidth", k.bandwidth()}, {"points", vector_to_json(k.points())}}; }

Kde1d kde_from_json(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("bandwidth") || !j.contains("points")) config_error(path, "expected bandwidth and points");
  const double h = number_at(j.at("bandwidth"), path + ".bandwidth");
  if (!(h > 0.0)) config_error(path + ".bandwidth", "must be > 0");
  return Kde1d(vector_from_json(j.at("points"), path + ".points"), h);
}

Json linear_fit_to_json(const LinearFit& f) {
  return {{"intercept", f.intercept},
          {"slope", f.slope},
          {"correlation", f.correlation},
          {"intercept_se", f.intercept_se},
          {"slope_se", f.slope_se}};
}

// Schema checks ---------------------------------------------------------------

class Checker {
 public:
  std::vector<std::string> problems;

  const Json* field(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(path + "." + key + ": missing");
      return nullptr;
    }
    return &obj.at(key);
  }
  bool number(const Json& obj, const std::string& key, const std::string& path) {
    const Json* j = field(obj, key, path);
    if (j && !j->is_number()) {
      problems.push_back(path + "." + key + ": expected a number");
      return false;
    }
    return j != nullptr;
  }
  bool integer(const Json& obj, const std::string& key, const std::string& path) {
    const Json* j = field(obj, key, path);
    if (j && !j->is_number_integer()) {
      problems.push_back(path + "." + key + ": expected an integer");
      return false;
    }
    return j != nullptr;
  }
  bool boolean(const Json& obj, const std::string& key, const std::string& path) {
    const Json* j = field(obj, key, path);
    if (j && !j->is_boolean()) {
      problems.push_back(path + "." + key + ": expected a boolean");
      return false;
    }
    return j != nullptr;
  }
  bool numbers(const Json& obj, const std::string& key, const std::string& path, long size = -1) {
    const Json* j = field(obj, key, path);
    if (!j) return false;
    if (!j->is_array()) {
      problems.push_back(path + "." + key + ": expected an array");
      return false;
    }
    for (const auto& v : *j)
      if (!v.is_number()) {
        problems.push_back(path + "." + key + ": expected numbers");
        return false;
      }
    if (size >= 0 && static_cast<long>(j->size()) != size) {
      problems.push_back(path + "." + key + ": expected " + std::to_string(size) + " entries");
      return false;
    }
    return true;
  }

  void test_report(const Json& t, const std::string& path, long d) {
    if (!t.is_object()) {
      problems.push_back(path + ": expected an object");
      return;
    }
    const bool ok = number(t, "statistic", path) && number(t, "quantile", path) && boolean(t, "accept_h0", path);
    number(t, "variance", path);
    integer(t, "level_index", path);
    if (number(t, "p_value", path)) {
      const double p = t["p_value"].get<double>();
      if (!(p >= 0.0 && p <= 1.0)) problems.push_back(path + ".p_value: outside [0, 1]");
    }
    numbers(t, "direction", path, d);
    if (ok) {
      const bool accept = std::abs(t["statistic"].get<double>()) <= t["quantile"].get<double>();
      if (accept != t["accept_h0"].get<bool>()) problems.push_back(path + ".accept_h0: disagrees with statistic");
    }
  }

  void diagnostics(const Json& j, const std::string& path) {
    if (!j.is_object()) {
      problems.push_back(path + ": expected an object");
      return;
    }
    for (const char* key : {"instrumental_size", "retained_x", "retained_y", "paired_n", "masked_x", "masked_y",
                            "proposals", "anneal_evaluations"})
      integer(j, key, path);
    for (const char* key : {"theta", "numerator_bandwidth", "denominator_scott_bandwidth", "ess", "anneal_value",
                            "test_estimate"})
      number(j, key, path);
  }

  void kde(const Json& j, const std::string& key, const std::string& path) {
    const Json* k = field(j, key, path);
    if (!k) return;
    const std::string p = path + "." + key;
    if (number(*k, "bandwidth", p) && !((*k)["bandwidth"].get<double>() > 0.0))
      problems.push_back(p + ".bandwidth: must be > 0");
    numbers(*k, "points", p);
  }
};

}  // namespace

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
  return out;
}

Vector vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) out(static_cast<Eigen::Index>(i)) = number_at(j[i], path + "[" + std::to_string(i) + "]");
  return out;
}

Matrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_error(path, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix out(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const Vector row = vector_from_json(j[i], p);
    if (static_cast<std::size_t>(row.size()) != cols) config_error(p, "rows differ in length");
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

Json pursuit_config_to_json(const PursuitConfig& cfg) {
  Json out{{"divergence", cfg.spec.name()}};
  if (cfg.spec.kind == DivergenceKind::kPower) out["gamma"] = cfg.spec.gamma;
  out["alpha"] = cfg.alpha;
  out["max_k"] = cfg.max_k;
  out["nu"] = cfg.truncation.nu;
  out["min_retained"] = cfg.truncation.min_retained;
  out["floor_fraction"] = cfg.floor_fraction;
  out["instrumental_size"] = cfg.instrumental_sample_size;
  out["seed"] = cfg.seed;
  out["paper_threshold"] = cfg.paper_threshold;
  out["stop_on_accept"] = cfg.stop_on_accept;
  out["bootstrap_replicates"] = cfg.bootstrap_replicates;
  out["search_fraction"] = cfg.search_fraction;
  out["search_radius_deg"] = cfg.search_radius_deg;
  out["proposal_factor"] = cfg.proposal_factor;
  out["anneal"] = anneal_to_json(cfg.anneal);
  return out;
}

PursuitConfig pursuit_config_from_json(const Json& j, const std::string& path, PursuitConfig cfg) {
  if (!j.is_object()) config_error(path, "expected an object");
  std::string divergence = cfg.spec.name();
  std::optional<double> gamma;
  if (cfg.spec.kind == DivergenceKind::kPower) gamma = cfg.spec.gamma;
  for (const auto& [key, value] : j.items()) {
    const std::string p = path + "." + key;
    if (key == "divergence") {
      if (!value.is_string()) config_error(p, "expected a string");
      divergence = value.get<std::string>();
    } else if (key == "gamma") gamma = number_at(value, p);
    else if (key == "alpha") cfg.alpha = number_at(value, p);
    else if (key == "max_k") cfg.max_k = int_at(value, p);
    else if (key == "nu") cfg.truncation.nu = number_at(value, p);
    else if (key == "min_retained") cfg.truncation.min_retained = int_at(value, p);
    else if (key == "floor_fraction") cfg.floor_fraction = number_at(value, p);
    else if (key == "instrumental_size") cfg.instrumental_sample_size = int_at(value, p);
    else if (key == "seed") {
      if (!value.is_number_unsigned()) config_error(p, "expected a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "paper_threshold") cfg.paper_threshold = bool_at(value, p);
    else if (key == "stop_on_accept") cfg.stop_on_accept = bool_at(value, p);
    else if (key == "bootstrap_replicates") cfg.bootstrap_replicates = int_at(value, p);
    else if (key == "search_fraction") cfg.search_fraction = number_at(value, p);
    else if (key == "search_radius_deg") cfg.search_radius_deg = number_at(value, p);
    else if (key == "proposal_factor") cfg.proposal_factor = int_at(value, p);
    else if (key == "anneal") cfg.anneal = anneal_from_json(value, p, cfg.anneal);
    else config_error(p, "unknown key");
  }
  try {
    cfg.spec = DivergenceSpec::from_name(divergence, gamma);
    cfg.spec.validate();
  } catch (const Error& e) {
    config_error(path + ".divergence", e.what());
  }
  return cfg;
}

Json test_report_to_json(const TestReport& r) {
  return {{"statistic", r.statistic},
          {"variance", r.variance},
          {"p_value", r.p_value},
          {"quantile", r.quantile},
          {"accept_h0", r.accept_h0},
          {"direction", vector_to_json(r.direction)},
          {"level_index", r.level_index}};
}

Json pursuit_result_to_json(const PursuitResult& r) {
  Json out;
  out["schema"] = kResultSchema;
  out["config"] = pursuit_config_to_json(r.config);
  out["null_level"] = {{"divergence_estimate", r.null_level.divergence_estimate},
                       {"bootstrap_se", r.null_level.bootstrap_se},
                       {"test", test_report_to_json(r.null_level.test)},
                       {"diagnostics", diagnostics_to_json(r.null_level.diagnostics)}};
  Json levels = Json::array();
  int index = 0;
  for (const auto& level : r.model.levels()) {
    levels.push_back({{"index", ++index},
                      {"direction", vector_to_json(level.direction)},
                      {"divergence_estimate", level.divergence_estimate},
                      {"bootstrap_se", level.bootstrap_se},
                      {"test", test_report_to_json(level.test)},
                      {"diagnostics", diagnostics_to_json(level.diagnostics)},
                      {"numerator", kde_to_json(level.numerator)},
                      {"denominator", kde_to_json(level.denominator)}});
  }
  out["levels"] = std::move(levels);
  out["model"] = {{"base", {{"mu", vector_to_json(r.model.base().mu())}, {"sigma", matrix_to_json(r.model.base().sigma())}}}};
  out["trace"] = r.trace;
  out["stopped_at"] = r.stopped_at;
  out["accepted"] = r.accepted;
  return out;
}

Json copula_report_to_json(const CopulaReport& r) {
  Json tests = Json::array();
  for (const auto& t : r.level_tests) tests.push_back(test_report_to_json(t));
  return {{"basis", matrix_to_json(r.basis)},
          {"final_test", test_report_to_json(r.final_test)},
          {"verdict", r.verdict},
          {"level_tests", std::move(tests)}};
}

Json regression_report_to_json(const RegressionReport& r) {
  return {{"pursuit_coefficients", linear_fit_to_json(r.pursuit)},
          {"least_squares_coefficients", linear_fit_to_json(r.least_squares)},
          {"correlation_pursuit", r.correlation_pursuit},
          {"correlation_data", r.correlation_data},
          {"structure_axis", r.structure_axis},
          {"structure_angle_deg", r.structure_angle_deg}};
}

PursuitModel model_from_result(const Json& doc) {
  const auto problems = validate_result(doc);
  if (!problems.empty()) config_error("result", problems.front());
  const Json& base = doc["model"]["base"];
  PursuitModel model(EllipticalModel(vector_from_json(base["mu"], "model.base.mu"),
                                     matrix_from_json(base["sigma"], "model.base.sigma")));
  int i = 0;
  for (const auto& level : doc["levels"]) {
    const std::string p = "levels[" + std::to_string(i++) + "]";
    PursuitLevel l;
    l.direction = vector_from_json(level["direction"], p + ".direction");
    l.numerator = kde_from_json(level["numerator"], p + ".numerator");
    l.denominator = kde_from_json(level["denominator"], p + ".denominator");
    model.add_level(std::move(l));
  }
  return model;
}

std::vector<std::string> validate_result(const Json& doc) {
  Checker c;
  if (!doc.is_object()) return {"document: expected an object"};
  if (!doc.contains("schema") || doc["schema"] != kResultSchema)
    c.problems.push_back(std::string("schema: expected \"") + kResultSchema + "\"");

  long d = -1;
  if (const Json* src = c.field(doc, "source", "document")) {
    if (src->is_object()) {
      const Json* kind = c.field(*src, "kind", "source");
      if (kind && !(kind->is_string() && (*kind == "scenario" || *kind == "csv")))
        c.problems.push_back("source.kind: expected \"scenario\" or \"csv\"");
      const Json* name = c.field(*src, "name", "source");
      if (name && !name->is_string()) c.problems.push_back("source.name: expected a string");
      c.integer(*src, "n", "source");
      if (c.integer(*src, "d", "source")) d = (*src)["d"].get<long>();
    } else {
      c.problems.push_back("source: expected an object");
    }
  }
  if (const Json* cfg = c.field(doc, "config", "document")) {
    try {
      pursuit_config_from_json(*cfg, "config");
    } catch (const Error& e) {
      c.problems.push_back(e.what());
    }
  }
  if (const Json* null_level = c.field(doc, "null_level", "document")) {
    c.number(*null_level, "divergence_estimate", "null_level");
    c.number(*null_level, "bootstrap_se", "null_level");
    if (const Json* t = c.field(*null_level, "test", "null_level")) c.test_report(*t, "null_level.test", 0);
    if (const Json* dg = c.field(*null_level, "diagnostics", "null_level")) c.diagnostics(*dg, "null_level.diagnostics");
  }
  long n_levels = -1;
  if (const Json* levels = c.field(doc, "levels", "document")) {
    if (!levels->is_array()) {
      c.problems.push_back("levels: expected an array");
    } else {
      n_levels = static_cast<long>(levels->size());
      for (std::size_t i = 0; i < levels->size(); ++i) {
        const Json& l = (*levels)[i];
        const std::string p = "levels[" + std::to_string(i) + "]";
        if (c.integer(l, "index", p) && l["index"].get<long>() != static_cast<long>(i) + 1)
          c.problems.push_back(p + ".index: expected " + std::to_string(i + 1));
        if (c.numbers(l, "direction", p, d) && d > 0) {
          double norm = 0.0;
          for (const auto& v : l["direction"]) norm += v.get<double>() * v.get<double>();
          if (std::abs(std::sqrt(norm) - 1.0) > 1e-9) c.problems.push_back(p + ".direction: not a unit vector");
        }
        c.number(l, "divergence_estimate", p);
        if (c.number(l, "bootstrap_se", p) && l["bootstrap_se"].get<double>() < 0.0)
          c.problems.push_back(p + ".bootstrap_se: negative");
        if (const Json* t = c.field(l, "test", p)) c.test_report(*t, p + ".test", d);
        if (const Json* dg = c.field(l, "diagnostics", p)) c.diagnostics(*dg, p + ".diagnostics");
        c.kde(l, "numerator", p);
        c.kde(l, "denominator", p);
      }
    }
  }
  if (const Json* model = c.field(doc, "model", "document")) {
    if (const Json* base = c.field(*model, "base", "model")) {
      c.numbers(*base, "mu", "model.base", d);
      if (const Json* sigma = c.field(*base, "sigma", "model.base")) {
        bool ok = sigma->is_array() && (d < 0 || static_cast<long>(sigma->size()) == d);
        if (ok)
          for (const auto& row : *sigma)
            ok = ok && row.is_array() && (d < 0 || static_cast<long>(row.size()) == d);
        if (!ok) c.problems.push_back("model.base.sigma: expected a d x d array");
      }
    }
  }
  if (c.numbers(doc, "trace", "document") && n_levels >= 0 && static_cast<long>(doc["trace"].size()) != n_levels + 1)
    c.problems.push_back("trace: expected one entry per level plus level 0");
  if (c.integer(doc, "stopped_at", "document") && n_levels >= 0 && doc["stopped_at"].get<long>() != n_levels)
    c.problems.push_back("stopped_at: disagrees with the number of levels");
  c.boolean(doc, "accepted", "document");

  static const std::set<std::string> known{"schema", "source", "config", "null_level", "levels", "model", "trace",
                                           "stopped_at", "accepted", "copula", "regression", "deconvolution",
                                           "error", "membership"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) c.problems.push_back(key + ": unknown key");
  }
  for (const char* key : {"copula", "regression", "deconvolution", "membership"})
    if (doc.contains(key) && !doc[key].is_object()) c.problems.push_back(std::string(key) + ": expected an object");
  if (doc.contains("copula") && doc["copula"].is_object()) {
    const Json& cop = doc["copula"];
    c.boolean(cop, "verdict", "copula");
    if (const Json* t = c.field(cop, "final_test", "copula")) c.test_report(*t, "copula.final_test", d);
  }
  if (doc.contains("regression") && doc["regression"].is_object()) {
    const Json& reg = doc["regression"];
    for (const char* key : {"correlation_pursuit", "correlation_data"})
      if (c.number(reg, key, "regression") && std::abs(reg[key].get<double>()) > 1.0)
        c.problems.push_back(std::string("regression.") + key + ": |correlation| > 1");
  }
  if (doc.contains("error")) {
    const Json& e = doc["error"];
    if (!e.is_object() || !e.contains("code") || !e["code"].is_string() || !e.contains("message"))
      c.problems.push_back("error: expected {code, message, level}");
  }
  return c.problems;
}

std::string dump_document(const Json& doc) { return doc.dump(2) + "\n"; }

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kConfig, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out.flush()) fail(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace ppursuit
