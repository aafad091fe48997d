#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppursuit/ppursuit.h"

using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct SharedFlags {
  std::string divergence;
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::optional<int> max_k;
  std::optional<double> nu;
  std::optional<std::uint64_t> seed;
  std::optional<int> instrumental_size;
  bool paper_threshold = false;
  std::string output = "ppursuit_out";
};

void add_shared(CLI::App* app, SharedFlags& f) {
  app->add_option("--divergence", f.divergence, "kl, hellinger, chi2 or power")
      ->check(CLI::IsMember({"kl", "hellinger", "chi2", "power"}));
  app->add_option("--gamma", f.gamma, "exponent of the power divergence");
  app->add_option("--alpha", f.alpha, "test level");
  app->add_option("--max-k", f.max_k, "maximum number of levels");
  app->add_option("--nu", f.nu, "truncation exponent");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--instrumental-size", f.instrumental_size, "instrumental sample size");
  app->add_flag("--paper-threshold", f.paper_threshold, "use the 0.6 normal quantile as threshold");
  app->add_option("--output", f.output, "output directory");
}

json pursuit_overrides(const SharedFlags& f) {
  json p = json::object();
  if (!f.divergence.empty()) p["divergence"] = f.divergence;
  if (f.gamma) p["gamma"] = *f.gamma;
  if (f.alpha) p["alpha"] = *f.alpha;
  if (f.max_k) p["max_k"] = *f.max_k;
  if (f.nu) p["nu"] = *f.nu;
  if (f.seed) p["seed"] = *f.seed;
  if (f.instrumental_size) p["instrumental_size"] = *f.instrumental_size;
  if (f.paper_threshold) p["paper_threshold"] = true;
  return p;
}

int report_failure(int status) {
  std::fprintf(stderr, "ppursuit: %s\n", ppursuit_last_error());
  return ppursuit_status_is_config_error(status) ? kExitConfig : kExitNumerical;
}

void print_summary(ppursuit_artifacts* art) {
  char* doc_text = nullptr;
  if (ppursuit_artifacts_document(art, &doc_text) != PPURSUIT_OK) return;
  const json doc = json::parse(doc_text);
  ppursuit_string_free(doc_text);
  const auto& null_level = doc["null_level"];
  std::printf("level 0: estimate %.6g  statistic %.4f  p %.4f  %s\n", null_level["divergence_estimate"].get<double>(),
              null_level["test"]["statistic"].get<double>(), null_level["test"]["p_value"].get<double>(),
              null_level["test"]["accept_h0"].get<bool>() ? "accept" : "reject");
  for (const auto& level : doc["levels"]) {
    std::printf("level %d: estimate %.6g  statistic %.4f  p %.4f  %s  direction", level["index"].get<int>(),
                level["divergence_estimate"].get<double>(), level["test"]["statistic"].get<double>(),
                level["test"]["p_value"].get<double>(), level["test"]["accept_h0"].get<bool>() ? "accept" : "reject");
    for (const auto& v : level["direction"]) std::printf(" %.4f", v.get<double>());
    std::printf("\n");
  }
  if (doc.contains("membership"))
    std::printf("membership of the hypothesized direction: %s\n", doc["membership"]["member"].get<bool>() ? "true" : "false");
  if (doc.contains("copula"))
    std::printf("copula verdict: %s\n", doc["copula"]["verdict"].get<bool>() ? "same copula" : "different copula");
  if (doc.contains("regression")) {
    const auto& r = doc["regression"];
    std::printf("pursuit regression: intercept %.6g slope %.6g\n", r["pursuit_coefficients"]["intercept"].get<double>(),
                r["pursuit_coefficients"]["slope"].get<double>());
    std::printf("least squares:      intercept %.6g slope %.6g\n",
                r["least_squares_coefficients"]["intercept"].get<double>(),
                r["least_squares_coefficients"]["slope"].get<double>());
  }
  if (doc.contains("deconvolution")) {
    std::printf("sup-norm gap per level:");
    for (const auto& g : doc["deconvolution"]["sup_gap"]) std::printf(" %.4g", g.get<double>());
    std::printf("\n");
  }
  std::printf("result: %s\n", ppursuit_artifacts_result_file(art));
}

int finish_run(int status, ppursuit_artifacts* art) {
  if (status == PPURSUIT_OK) print_summary(art);
  else if (art) std::fprintf(stderr, "partial artifacts in %s\n", ppursuit_artifacts_log(art));
  ppursuit_artifacts_free(art);
  return status == PPURSUIT_OK ? 0 : report_failure(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection pursuit density estimation with divergence-based stopping"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ppursuit_version());

  SharedFlags shared;
  std::string target;
  std::optional<int> n;
  std::optional<int> d;
  auto* simulate = app.add_subcommand("simulate", "run a bundled scenario or a scenario file");
  simulate->add_option("scenario", target, "scenario name or config path")->required();
  simulate->add_option("--n", n, "sample size");
  simulate->add_option("--d", d, "dimension (sim42 only)");
  add_shared(simulate, shared);

  auto* list = app.add_subcommand("scenarios", "list bundled scenarios");
  std::string show;
  list->add_option("--show", show, "print one scenario's configuration");

  std::string delimiter = ",";
  bool no_header = false;
  std::vector<std::string> columns;
  std::vector<double> hypothesis;
  auto add_csv = [&](CLI::App* sub) {
    sub->add_option("csv", target, "data file")->required()->check(CLI::ExistingFile);
    sub->add_option("--delimiter", delimiter, "cell delimiter");
    sub->add_flag("--no-header", no_header, "first row holds data");
    sub->add_option("--columns", columns, "columns to use, by name or 0-based index")->delimiter(',');
    add_shared(sub, shared);
  };
  auto* run = app.add_subcommand("run", "pursue a CSV data set");
  add_csv(run);
  run->add_option("--hypothesis", hypothesis, "direction to test for level-1 membership")->delimiter(',');
  auto* copula = app.add_subcommand("copula-test", "copula goodness-of-fit test on a CSV data set");
  add_csv(copula);
  int response = 0, predictor = 1;
  double tolerance = 15.0;
  auto* regress = app.add_subcommand("regress", "pursuit regression of one column on another");
  add_csv(regress);
  regress->add_option("--response", response, "response column index");
  regress->add_option("--predictor", predictor, "predictor column index");
  regress->add_option("--tolerance", tolerance, "axis-alignment tolerance in degrees");

  std::string grid_output;
  int level = -1;
  std::vector<int> axes;
  std::vector<double> mins, maxs, fixed;
  std::vector<int> counts;
  auto* grid = app.add_subcommand("emit-grid", "write a density grid from a result file");
  grid->add_option("result", target, "result file")->required()->check(CLI::ExistingFile);
  grid->add_option("--output", grid_output, "output CSV path")->required();
  grid->add_option("--level", level, "levels to include (default: all)");
  grid->add_option("--axes", axes, "one or two varying axes")->delimiter(',');
  grid->add_option("--mins", mins, "lower bounds")->delimiter(',');
  grid->add_option("--maxs", maxs, "upper bounds")->delimiter(',');
  grid->add_option("--counts", counts, "points per axis")->delimiter(',');
  grid->add_option("--fixed", fixed, "values of every coordinate off the grid axes")->delimiter(',');

  auto* validate = app.add_subcommand("validate", "check a result file against its schema");
  validate->add_option("result", target, "result file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (list->parsed()) {
    char* text = nullptr;
    const int status = show.empty() ? ppursuit_scenario_names(&text) : ppursuit_scenario_json(show.c_str(), &text);
    if (status != PPURSUIT_OK) return report_failure(status);
    std::fputs(text, stdout);
    ppursuit_string_free(text);
    return 0;
  }

  if (simulate->parsed()) {
    json overrides = json::object();
    const json p = pursuit_overrides(shared);
    if (!p.empty()) overrides["pursuit"] = p;
    if (n) overrides["n"] = *n;
    if (d) overrides["d"] = *d;
    if (d && *d > 10) std::fprintf(stderr, "warning: d = %d makes the multivariate density estimates slow\n", *d);
    ppursuit_artifacts* art = nullptr;
    const int status = ppursuit_simulate(target.c_str(), overrides.dump().c_str(), shared.output.c_str(), &art);
    return finish_run(status, art);
  }

  if (run->parsed() || copula->parsed() || regress->parsed()) {
    json request = json::object();
    request["analysis"] = copula->parsed() ? "copula" : regress->parsed() ? "regression" : "pursuit";
    request["pursuit"] = pursuit_overrides(shared);
    if (delimiter.size() != 1) {
      std::fprintf(stderr, "ppursuit: --delimiter must be one character\n");
      return kExitConfig;
    }
    json csv{{"delimiter", delimiter}, {"header", !no_header}};
    if (!columns.empty()) {
      json cols = json::array();
      for (const auto& c : columns) {
        const bool numeric = !c.empty() && c.find_first_not_of("0123456789") == std::string::npos;
        if (numeric) cols.push_back(std::stoi(c));
        else cols.push_back(c);
      }
      csv["columns"] = cols;
    }
    request["csv"] = csv;
    if (regress->parsed())
      request["regression"] = {{"response", response}, {"predictor", predictor}, {"tolerance_deg", tolerance}};
    if (!hypothesis.empty()) request["hypothesis"] = hypothesis;
    ppursuit_artifacts* art = nullptr;
    const int status = ppursuit_analyze_csv(target.c_str(), request.dump().c_str(), shared.output.c_str(), &art);
    return finish_run(status, art);
  }

  if (grid->parsed()) {
    std::string grid_json;
    if (!axes.empty()) {
      grid_json = json{{"axes", axes}, {"mins", mins}, {"maxs", maxs}, {"counts", counts}, {"fixed", fixed}}.dump();
    }
    const int status = ppursuit_emit_grid(target.c_str(), grid_json.empty() ? nullptr : grid_json.c_str(), level,
                                          grid_output.c_str());
    if (status != PPURSUIT_OK) return report_failure(status);
    std::printf("grid: %s\n", grid_output.c_str());
    return 0;
  }

  if (validate->parsed()) {
    char* problems = nullptr;
    const int status = ppursuit_validate_result_file(target.c_str(), &problems);
    if (status != PPURSUIT_OK) return report_failure(status);
    const bool ok = problems[0] == '\0';
    std::fputs(ok ? "valid\n" : problems, ok ? stdout : stderr);
    ppursuit_string_free(problems);
    return ok ? 0 : kExitConfig;
  }
  return 0;
}
