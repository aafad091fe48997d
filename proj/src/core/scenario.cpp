#include "core/scenario.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "core/kde.hpp"

namespace fs = std::filesystem;

namespace ppursuit {

namespace {

constexpr std::uint64_t kDataStream = 700;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::kConfig, path + ": " + what);
}

double number_at(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) config_error(path + "." + key, "missing");
  if (!j[key].is_number()) config_error(path + "." + key, "expected a number");
  return j[key].get<double>();
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) config_error(path + "." + key, "unknown key");
  }
}

std::vector<ScenarioDistribution> list_from_json(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_array()) config_error(path + "." + key, "expected an array");
  std::vector<ScenarioDistribution> out;
  for (std::size_t i = 0; i < j[key].size(); ++i)
    out.push_back(distribution_from_json(j[key][i], path + "." + key + "[" + std::to_string(i) + "]"));
  return out;
}

Json list_to_json(const std::vector<ScenarioDistribution>& v) {
  Json out = Json::array();
  for (const auto& d : v) out.push_back(distribution_to_json(d));
  return out;
}

// Inverse of the map x -> (x1 + x2, x0 + x2, x0 + x1).
Matrix mixing_41() {
  Matrix r(3, 3);
  r << -0.5, 0.5, 0.5,
       0.5, -0.5, 0.5,
       0.5, 0.5, -0.5;
  return r;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

class RunLog {
 public:
  void line(const std::string& msg) { text_ << timestamp() << ' ' << msg << '\n'; }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

}  // namespace

Json grid_to_json(const GridSpec& g) {
  return {{"axes", g.axes}, {"mins", g.mins}, {"maxs", g.maxs}, {"counts", g.counts}, {"fixed", vector_to_json(g.fixed)}};
}

GridSpec grid_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  only_keys(j, {"axes", "mins", "maxs", "counts", "fixed"}, path);
  GridSpec g;
  try {
    g.axes = j.at("axes").get<std::vector<int>>();
    g.mins = j.at("mins").get<std::vector<double>>();
    g.maxs = j.at("maxs").get<std::vector<double>>();
    g.counts = j.at("counts").get<std::vector<int>>();
  } catch (const Json::exception& e) {
    config_error(path, e.what());
  }
  g.fixed = vector_from_json(j.contains("fixed") ? j["fixed"] : Json(), path + ".fixed");
  return g;
}

GridSpec model_grid(const EllipticalModel& base, int count) {
  const int d = base.dim();
  GridSpec grid;
  grid.fixed = base.mu();
  for (int axis = 0; axis < std::min(d, 2); ++axis) {
    const double sd = std::sqrt(base.sigma()(axis, axis));
    grid.axes.push_back(axis);
    grid.mins.push_back(base.mu()(axis) - 3.0 * sd);
    grid.maxs.push_back(base.mu()(axis) + 3.0 * sd);
    grid.counts.push_back(count);
  }
  return grid;
}

const char* analysis_name(Analysis a) {
  switch (a) {
    case Analysis::kPursuit: return "pursuit";
    case Analysis::kCopula: return "copula";
    case Analysis::kRegression: return "regression";
    case Analysis::kDeconvolution: return "deconvolution";
  }
  return "pursuit";
}

Analysis analysis_from_name(const std::string& name) {
  if (name == "pursuit") return Analysis::kPursuit;
  if (name == "copula") return Analysis::kCopula;
  if (name == "regression") return Analysis::kRegression;
  if (name == "deconvolution") return Analysis::kDeconvolution;
  fail(ErrorCode::kConfig, "unknown analysis '" + name + "'");
}

void ScenarioConfig::validate() const {
  if (name.empty()) config_error("name", "must be non-empty");
  try {
    distribution.validate();
  } catch (const Error& e) {
    config_error("distribution", e.what());
  }
  const int d = dim();
  if (n < d + 1) config_error("n", "must be >= d + 1 = " + std::to_string(d + 1));
  if (static_cast<int>(outliers.size()) >= n) config_error("outliers", "more outliers than observations");
  for (std::size_t i = 0; i < outliers.size(); ++i)
    if (outliers[i].size() != d) config_error("outliers[" + std::to_string(i) + "]", "dimension must equal d");
  if (hypothesis && (hypothesis->size() != d || !(hypothesis->norm() > 0.0)))
    config_error("hypothesis", "must be a nonzero vector of length d");
  if (grid) {
    try {
      grid->validate(d);
    } catch (const Error& e) {
      config_error("grid", e.what());
    }
  }
  if (analysis == Analysis::kRegression && d != 2) config_error("analysis", "regression needs d = 2");
  try {
    pursuit.resolved(d, n);
  } catch (const Error& e) {
    config_error("pursuit", e.what());
  }
}

std::vector<std::string> builtin_scenario_names() {
  return {"sim41", "sim42", "sim43", "sim44", "clayton", "deconv", "null"};
}

ScenarioConfig builtin_scenario(const std::string& name, int d) {
  ScenarioConfig cfg;
  cfg.name = name;
  if (d > 0 && name != "sim42") config_error("d", "scenario '" + name + "' has a fixed dimension");
  if (name == "sim41") {
    cfg.description =
        "x1 + x2 ~ N(-5, 2^2), x0 + x2 ~ N(1, 1) and x0 + x1 ~ Gumbel(-3, 4), independent";
    cfg.distribution = ScenarioDistribution::linear_map(
        ScenarioDistribution::product({ScenarioDistribution::normal(-5.0, 2.0), ScenarioDistribution::normal(1.0, 1.0),
                                       ScenarioDistribution::gumbel(-3.0, 4.0)}),
        mixing_41());
    cfg.n = 200;
    cfg.pursuit.spec = DivergenceSpec::chi_squared();
    Vector h(3);
    h << 1.0, 1.0, 0.0;
    cfg.hypothesis = h.normalized();
  } else if (name == "sim42") {
    const int dim = d > 0 ? d : 5;
    if (dim < 2) config_error("d", "sim42 needs d >= 2");
    cfg.description = "Gumbel(-5, 1) on x0, standard normal on the other axes, two outliers at 2 e0";
    cfg.distribution = ScenarioDistribution::product(
        {ScenarioDistribution::gumbel(-5.0, 1.0),
         ScenarioDistribution::gaussian(Vector::Zero(dim - 1), Matrix::Identity(dim - 1, dim - 1))});
    cfg.n = 100;
    cfg.outliers = {2.0 * Vector::Unit(dim, 0), 2.0 * Vector::Unit(dim, 0)};
    cfg.pursuit.spec = DivergenceSpec::hellinger();
  } else if (name == "sim43") {
    cfg.description = "Gumbel(-5, 1) response x0 independent of a standard normal predictor x1";
    cfg.distribution = ScenarioDistribution::product(
        {ScenarioDistribution::gumbel(-5.0, 1.0), ScenarioDistribution::normal(0.0, 1.0)});
    cfg.n = 50;
    cfg.pursuit.spec = DivergenceSpec::power(1.25);
    cfg.analysis = Analysis::kRegression;
  } else if (name == "sim44") {
    cfg.description = "Gaussian copula rho = 0.5 with Gumbel(-1, 1) and Exponential(2) margins";
    cfg.distribution = ScenarioDistribution::gaussian_copula_pair(0.5, ScenarioDistribution::gumbel(-1.0, 1.0),
                                                                  ScenarioDistribution::exponential(2.0));
    cfg.n = 100;
    cfg.analysis = Analysis::kCopula;
  } else if (name == "clayton") {
    cfg.description = "Clayton copula theta = 4 with standard normal margins";
    cfg.distribution = ScenarioDistribution::clayton_copula_pair(4.0, ScenarioDistribution::normal(0.0, 1.0),
                                                                 ScenarioDistribution::normal(0.0, 1.0));
    cfg.n = 300;
    cfg.analysis = Analysis::kCopula;
  } else if (name == "deconv") {
    cfg.description = "independent Exponential(1) pair plus N(0, 0.25 I) noise";
    cfg.distribution = ScenarioDistribution::sum(
        {ScenarioDistribution::product({ScenarioDistribution::exponential(1.0), ScenarioDistribution::exponential(1.0)}),
         ScenarioDistribution::gaussian(Vector::Zero(2), 0.25 * Matrix::Identity(2, 2))});
    cfg.n = 500;
    cfg.analysis = Analysis::kDeconvolution;
  } else if (name == "null") {
    cfg.description = "standard bivariate normal; the instrumental fit is already right";
    cfg.distribution = ScenarioDistribution::gaussian(Vector::Zero(2), Matrix::Identity(2, 2));
    cfg.n = 2000;
  } else {
    config_error("scenario", "unknown scenario '" + name + "'");
  }
  return cfg;
}

Json distribution_to_json(const ScenarioDistribution& dist) {
  return std::visit(
      [](const auto& n) -> Json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ScenarioDistribution::Gaussian>) {
          if (n.mean.size() == 1)
            return {{"kind", "normal"}, {"mean", n.mean(0)}, {"stddev", std::sqrt(n.covariance(0, 0))}};
          return {{"kind", "gaussian"}, {"mean", vector_to_json(n.mean)}, {"covariance", matrix_to_json(n.covariance)}};
        } else if constexpr (std::is_same_v<T, ScenarioDistribution::Gumbel>) {
          return {{"kind", "gumbel"}, {"location", n.location}, {"scale", n.scale}};
        } else if constexpr (std::is_same_v<T, ScenarioDistribution::Exponential>) {
          return {{"kind", "exponential"}, {"rate", n.rate}};
        } else if constexpr (std::is_same_v<T, ScenarioDistribution::GaussianCopulaPair>) {
          return {{"kind", "gaussian_copula"}, {"rho", n.rho}, {"margins", list_to_json(n.margins)}};
        } else if constexpr (std::is_same_v<T, ScenarioDistribution::ClaytonCopulaPair>) {
          return {{"kind", "clayton_copula"}, {"theta", n.theta}, {"margins", list_to_json(n.margins)}};
        } else if constexpr (std::is_same_v<T, ScenarioDistribution::Product>) {
          return {{"kind", "product"}, {"components", list_to_json(n.components)}};
        } else if constexpr (std::is_same_v<T, ScenarioDistribution::LinearMap>) {
          return {{"kind", "linear_map"},
                  {"base", distribution_to_json(n.base.front())},
                  {"matrix", matrix_to_json(n.matrix)},
                  {"offset", vector_to_json(n.offset)}};
        } else {
          return {{"kind", "sum"}, {"terms", list_to_json(n.terms)}};
        }
      },
      dist.node());
}

ScenarioDistribution distribution_from_json(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    config_error(path, "expected an object with a string \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  std::optional<ScenarioDistribution> out;
  if (kind == "normal") {
    only_keys(j, {"kind", "mean", "stddev"}, path);
    const double sd = number_at(j, "stddev", path);
    if (!(sd > 0.0)) config_error(path + ".stddev", "must be > 0");
    out = ScenarioDistribution::normal(number_at(j, "mean", path), sd);
  } else if (kind == "gaussian") {
    only_keys(j, {"kind", "mean", "covariance"}, path);
    if (!j.contains("mean") || !j.contains("covariance")) config_error(path, "gaussian needs mean and covariance");
    out = ScenarioDistribution::gaussian(vector_from_json(j["mean"], path + ".mean"),
                                         matrix_from_json(j["covariance"], path + ".covariance"));
  } else if (kind == "gumbel") {
    only_keys(j, {"kind", "location", "scale"}, path);
    out = ScenarioDistribution::gumbel(number_at(j, "location", path), number_at(j, "scale", path));
  } else if (kind == "exponential") {
    only_keys(j, {"kind", "rate"}, path);
    out = ScenarioDistribution::exponential(number_at(j, "rate", path));
  } else if (kind == "gaussian_copula" || kind == "clayton_copula") {
    const bool gauss = kind == "gaussian_copula";
    only_keys(j, {"kind", gauss ? "rho" : "theta", "margins"}, path);
    const double p = number_at(j, gauss ? "rho" : "theta", path);
    auto margins = list_from_json(j, "margins", path);
    if (margins.size() != 2) config_error(path + ".margins", "expected exactly two margins");
    out = gauss ? ScenarioDistribution::gaussian_copula_pair(p, margins[0], margins[1])
                : ScenarioDistribution::clayton_copula_pair(p, margins[0], margins[1]);
  } else if (kind == "product") {
    only_keys(j, {"kind", "components"}, path);
    out = ScenarioDistribution::product(list_from_json(j, "components", path));
  } else if (kind == "linear_map") {
    only_keys(j, {"kind", "base", "matrix", "offset"}, path);
    if (!j.contains("base") || !j.contains("matrix")) config_error(path, "linear_map needs base and matrix");
    ScenarioDistribution base = distribution_from_json(j["base"], path + ".base");
    Matrix m = matrix_from_json(j["matrix"], path + ".matrix");
    Vector offset = j.contains("offset") ? vector_from_json(j["offset"], path + ".offset") : Vector::Zero(m.rows());
    out = ScenarioDistribution::linear_map(std::move(base), std::move(m), std::move(offset));
  } else if (kind == "sum") {
    only_keys(j, {"kind", "terms"}, path);
    out = ScenarioDistribution::sum(list_from_json(j, "terms", path));
  } else {
    config_error(path + ".kind", "unknown distribution kind '" + kind + "'");
  }
  try {
    out->validate();
  } catch (const Error& e) {
    config_error(path, e.what());
  }
  return *out;
}

Json scenario_to_json(const ScenarioConfig& cfg) {
  Json out{{"name", cfg.name},
           {"description", cfg.description},
           {"distribution", distribution_to_json(cfg.distribution)},
           {"n", cfg.n},
           {"analysis", analysis_name(cfg.analysis)},
           {"pursuit", pursuit_config_to_json(cfg.pursuit)}};
  if (!cfg.outliers.empty()) {
    Json o = Json::array();
    for (const auto& v : cfg.outliers) o.push_back(vector_to_json(v));
    out["outliers"] = std::move(o);
  }
  if (cfg.hypothesis) out["hypothesis"] = vector_to_json(*cfg.hypothesis);
  if (cfg.grid) out["grid"] = grid_to_json(*cfg.grid);
  if (cfg.analysis == Analysis::kRegression)
    out["regression"] = {{"response", cfg.regression.response},
                         {"predictor", cfg.regression.predictor},
                         {"tolerance_deg", cfg.regression.tolerance_deg}};
  return out;
}

ScenarioConfig scenario_from_json(const Json& j) {
  if (!j.is_object()) config_error("scenario", "expected an object");
  only_keys(j,
            {"name", "description", "base", "d", "distribution", "n", "analysis", "pursuit", "outliers", "hypothesis",
             "grid", "regression", "output_dir"},
            "scenario");
  ScenarioConfig cfg;
  if (j.contains("base")) {
    if (!j["base"].is_string()) config_error("base", "expected a scenario name");
    int d = 0;
    if (j.contains("d")) {
      if (!j["d"].is_number_integer()) config_error("d", "expected an integer");
      d = j["d"].get<int>();
    }
    cfg = builtin_scenario(j["base"].get<std::string>(), d);
  } else {
    if (j.contains("d")) config_error("d", "only meaningful together with \"base\"");
    if (!j.contains("distribution")) config_error("distribution", "missing (or give a \"base\" scenario)");
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) config_error("name", "expected a string");
    cfg.name = j["name"].get<std::string>();
  }
  if (j.contains("description")) {
    if (!j["description"].is_string()) config_error("description", "expected a string");
    cfg.description = j["description"].get<std::string>();
  }
  if (j.contains("distribution")) cfg.distribution = distribution_from_json(j["distribution"], "distribution");
  if (j.contains("n")) {
    if (!j["n"].is_number_integer()) config_error("n", "expected an integer");
    cfg.n = j["n"].get<int>();
  }
  if (j.contains("analysis")) {
    if (!j["analysis"].is_string()) config_error("analysis", "expected a string");
    cfg.analysis = analysis_from_name(j["analysis"].get<std::string>());
  }
  if (j.contains("pursuit")) cfg.pursuit = pursuit_config_from_json(j["pursuit"], "pursuit", cfg.pursuit);
  if (j.contains("outliers")) {
    const Json& o = j["outliers"];
    if (!o.is_array()) config_error("outliers", "expected an array of points");
    cfg.outliers.clear();
    for (std::size_t i = 0; i < o.size(); ++i)
      cfg.outliers.push_back(vector_from_json(o[i], "outliers[" + std::to_string(i) + "]"));
  }
  if (j.contains("hypothesis")) {
    if (j["hypothesis"].is_null()) cfg.hypothesis.reset();
    else cfg.hypothesis = vector_from_json(j["hypothesis"], "hypothesis");
  }
  if (j.contains("grid")) cfg.grid = grid_from_json(j["grid"], "grid");
  if (j.contains("regression")) {
    const Json& r = j["regression"];
    if (!r.is_object()) config_error("regression", "expected an object");
    only_keys(r, {"response", "predictor", "tolerance_deg"}, "regression");
    if (r.contains("response")) cfg.regression.response = static_cast<int>(number_at(r, "response", "regression"));
    if (r.contains("predictor")) cfg.regression.predictor = static_cast<int>(number_at(r, "predictor", "regression"));
    if (r.contains("tolerance_deg")) cfg.regression.tolerance_deg = number_at(r, "tolerance_deg", "regression");
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) config_error("output_dir", "expected a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  for (const auto& name : builtin_scenario_names())
    if (name == name_or_path) return builtin_scenario(name);
  if (!fs::exists(name_or_path)) config_error("scenario", "'" + name_or_path + "' is neither a scenario nor a file");
  return scenario_from_json(read_json_file(name_or_path));
}

Matrix scenario_data(const ScenarioConfig& cfg) {
  cfg.validate();
  const int n_drawn = cfg.n - static_cast<int>(cfg.outliers.size());
  Matrix data(cfg.n, cfg.dim());
  data.topRows(n_drawn) = draw_scenario(cfg.distribution, n_drawn, derive_seed(cfg.pursuit.seed, kDataStream));
  for (std::size_t i = 0; i < cfg.outliers.size(); ++i)
    data.row(n_drawn + static_cast<Eigen::Index>(i)) = cfg.outliers[i].transpose();
  return data;
}

std::vector<double> deconvolution_gaps(const PursuitModel& model, const Matrix& data, const GridSpec& grid) {
  const KdeNd dense(data, scott_bandwidth(data));
  const Matrix pts = grid_points(grid);
  const Vector reference = dense.eval_rows(pts);
  std::vector<double> out;
  for (int k = 0; k <= model.k(); ++k) {
    const PursuitModel g = model.prefix(k);
    double gap = 0.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
      gap = std::max(gap, std::abs(eval_gk(g, pts.row(i).transpose()) - reference(i)));
    out.push_back(gap);
  }
  return out;
}

RunArtifacts run_analysis(const Matrix& data, const AnalysisRequest& req) {
  const int d = static_cast<int>(data.cols());
  fs::create_directories(req.output_dir);
  RunArtifacts art;
  art.result_file = (fs::path(req.output_dir) / "result.json").string();
  art.log = (fs::path(req.output_dir) / "run.log").string();
  RunLog log;
  log.line("source " + req.source_kind + " '" + req.source_name + "', n = " + std::to_string(data.rows()) +
           ", d = " + std::to_string(d) + ", analysis " + analysis_name(req.analysis));

  PursuitConfig cfg = req.pursuit;
  if (req.analysis == Analysis::kCopula) {
    cfg.max_k = d;
    cfg.stop_on_accept = false;
  } else if (req.analysis == Analysis::kRegression) {
    // The regression reads the first direction, so level 0 must not end the run.
    if (cfg.max_k < 1) cfg.max_k = 1;
    cfg.stop_on_accept = false;
  }

  Json doc;
  auto finish = [&](const Error* error, int level) {
    doc["source"] = {{"kind", req.source_kind}, {"name", req.source_name}, {"n", data.rows()}, {"d", d}};
    if (!req.generator.is_null()) doc["source"]["generator"] = req.generator;
    if (error) {
      doc["error"] = {{"code", error_code_name(error->code())}, {"message", error->what()}, {"level", level}};
      log.line(std::string("error ") + error_code_name(error->code()) + ": " + error->what());
    }
    const auto problems = validate_result(doc);
    for (const auto& p : problems) log.line("schema problem: " + p);
    write_text_file(art.result_file, dump_document(doc));
    log.line("wrote " + art.result_file);
    write_text_file(art.log, log.str());
    art.document = doc;
    if (!problems.empty() && !error) fail(ErrorCode::kParam, "result document fails its schema: " + problems.front());
  };

  PursuitResult result{cfg, PursuitModel(EllipticalModel(Vector::Zero(1), Matrix::Identity(1, 1))), {}, 0, false, {}, {}};
  try {
    result = run_pursuit(data, cfg);
  } catch (const PursuitError& e) {
    if (e.partial()) doc = pursuit_result_to_json(*e.partial());
    finish(&e, e.level());
    throw;
  } catch (const Error& e) {
    finish(&e, 0);
    throw;
  }
  doc = pursuit_result_to_json(result);
  for (std::size_t k = 0; k < result.trace.size(); ++k) {
    const TestReport& t = result.reports[k];
    log.line("level " + std::to_string(k) + ": estimate " + std::to_string(result.trace[k]) + ", statistic " +
             std::to_string(t.statistic) + (t.accept_h0 ? ", H0 accepted" : ", H0 rejected"));
  }

  try {
    const GridSpec grid = req.grid ? *req.grid : default_grid(data);
    switch (req.analysis) {
      case Analysis::kCopula:
        doc["copula"] = copula_report_to_json(copula_from_pursuit(result));
        break;
      case Analysis::kRegression:
        doc["regression"] = regression_report_to_json(regress_via_pursuit(data, result, req.regression));
        break;
      case Analysis::kDeconvolution:
        doc["deconvolution"] = {{"sup_gap", deconvolution_gaps(result.model, data, grid)}, {"grid", grid_to_json(grid)}};
        break;
      case Analysis::kPursuit:
        break;
    }
    if (req.hypothesis) {
      const Vector b = canonicalize(*req.hypothesis);
      doc["membership"] = {{"direction", vector_to_json(b)}, {"level", 1},
                           {"member", level_membership(data, result, 1, b)}};
    }
    for (int k = 0; k <= result.model.k(); ++k) {
      const std::string path = (fs::path(req.output_dir) / ("density_level" + std::to_string(k) + ".csv")).string();
      emit_density_grid(result.model.prefix(k), grid, path);
      art.density_grid_files.push_back(path);
    }
  } catch (const Error& e) {
    finish(&e, result.model.k());
    throw;
  }
  finish(nullptr, 0);
  return art;
}

RunArtifacts run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  AnalysisRequest req;
  req.source_kind = "scenario";
  req.source_name = cfg.name;
  req.generator = scenario_to_json(cfg);
  req.analysis = cfg.analysis;
  req.pursuit = cfg.pursuit;
  req.hypothesis = cfg.hypothesis;
  req.grid = cfg.grid;
  req.regression = cfg.regression;
  req.output_dir = cfg.output_dir;
  return run_analysis(scenario_data(cfg), req);
}

}  // namespace ppursuit
