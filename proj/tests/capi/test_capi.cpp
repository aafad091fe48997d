#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ppursuit/ppursuit.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ppursuit_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<double> gumbel_normal(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::extreme_value_distribution<double> g(-5.0, 1.0);
  std::normal_distribution<double> z;
  std::vector<double> v;
  for (int i = 0; i < n; ++i) {
    v.push_back(g(rng));
    v.push_back(z(rng));
  }
  return v;
}

}  // namespace

TEST(CApi, StatusNamesAndClasses) {
  EXPECT_STREQ(ppursuit_status_name(PPURSUIT_OK), "Ok");
  EXPECT_STREQ(ppursuit_status_name(PPURSUIT_E_ZERO_VARIANCE), "ZeroVariance");
  EXPECT_TRUE(ppursuit_status_is_config_error(PPURSUIT_E_PARSE));
  EXPECT_TRUE(ppursuit_status_is_config_error(PPURSUIT_E_NULL_ARGUMENT));
  EXPECT_FALSE(ppursuit_status_is_config_error(PPURSUIT_E_ZERO_VARIANCE));
  EXPECT_FALSE(ppursuit_status_is_config_error(PPURSUIT_E_INTERNAL));
  EXPECT_NE(std::strlen(ppursuit_version()), 0u);
}

TEST(CApi, NullArguments) {
  EXPECT_EQ(ppursuit_matrix_create(2, 2, nullptr, nullptr), PPURSUIT_E_NULL_ARGUMENT);
  EXPECT_EQ(ppursuit_pursue(nullptr, nullptr, nullptr), PPURSUIT_E_NULL_ARGUMENT);
  EXPECT_NE(std::strlen(ppursuit_last_error()), 0u);
  EXPECT_EQ(ppursuit_result_levels(nullptr), -1);
  ppursuit_matrix_free(nullptr);
  ppursuit_result_free(nullptr);
  ppursuit_string_free(nullptr);
}

TEST(CApi, MatrixRoundTrip) {
  const double values[] = {1.5, -2.0, 3.25, 1e-300, 7.0, 0.1};
  ppursuit_matrix* m = nullptr;
  ASSERT_EQ(ppursuit_matrix_create(3, 2, values, &m), PPURSUIT_OK);
  EXPECT_EQ(ppursuit_matrix_rows(m), 3u);
  EXPECT_EQ(ppursuit_matrix_cols(m), 2u);
  const fs::path dir = scratch("matrix");
  const std::string path = (dir / "m.csv").string();
  ASSERT_EQ(ppursuit_matrix_write_csv(m, path.c_str()), PPURSUIT_OK);
  ppursuit_matrix* back = nullptr;
  ASSERT_EQ(ppursuit_matrix_read_csv(path.c_str(), ',', 1, &back), PPURSUIT_OK);
  double out[6];
  ASSERT_EQ(ppursuit_matrix_copy(back, out, 6), PPURSUIT_OK);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(out[i], values[i]);
  EXPECT_EQ(ppursuit_matrix_copy(back, out, 5), PPURSUIT_E_DIMENSION_MISMATCH);
  ppursuit_matrix_free(m);
  ppursuit_matrix_free(back);

  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3,x\n";
  ppursuit_matrix* bad = nullptr;
  EXPECT_EQ(ppursuit_matrix_read_csv((dir / "bad.csv").string().c_str(), ',', 1, &bad), PPURSUIT_E_PARSE);
  EXPECT_EQ(bad, nullptr);
  EXPECT_NE(std::string(ppursuit_last_error()).find("3"), std::string::npos);
}

TEST(CApi, ConfigMerge) {
  ppursuit_config* cfg = nullptr;
  ASSERT_EQ(ppursuit_config_create(&cfg), PPURSUIT_OK);
  EXPECT_EQ(ppursuit_config_merge_json(cfg, "{\"divergence\": \"hellinger\", \"alpha\": 0.05}"), PPURSUIT_OK);
  char* text = nullptr;
  ASSERT_EQ(ppursuit_config_to_json(cfg, &text), PPURSUIT_OK);
  const std::string s(text);
  ppursuit_string_free(text);
  EXPECT_NE(s.find("\"hellinger\""), std::string::npos);
  EXPECT_NE(s.find("0.05"), std::string::npos);
  EXPECT_EQ(ppursuit_config_merge_json(cfg, "{\"alpha\": "), PPURSUIT_E_PARSE);
  EXPECT_EQ(ppursuit_config_merge_json(cfg, "{\"nonsense\": 1}"), PPURSUIT_E_CONFIG);
  ppursuit_config_free(cfg);
}

TEST(CApi, PursueAndInspect) {
  const std::vector<double> v = gumbel_normal(150, 3);
  ppursuit_matrix* data = nullptr;
  ASSERT_EQ(ppursuit_matrix_create(150, 2, v.data(), &data), PPURSUIT_OK);
  ppursuit_config* cfg = nullptr;
  ASSERT_EQ(ppursuit_config_create(&cfg), PPURSUIT_OK);
  ASSERT_EQ(ppursuit_config_merge_json(
                cfg, "{\"max_k\": 1, \"stop_on_accept\": false, \"bootstrap_replicates\": 20, "
                     "\"anneal\": {\"steps\": 200, \"restarts\": 1}}"),
            PPURSUIT_OK);
  ppursuit_result* r = nullptr;
  ASSERT_EQ(ppursuit_pursue(data, cfg, &r), PPURSUIT_OK) << ppursuit_last_error();
  EXPECT_EQ(ppursuit_result_levels(r), 1);
  double dir[2];
  ASSERT_EQ(ppursuit_result_direction(r, 1, dir, 2), PPURSUIT_OK);
  EXPECT_NEAR(dir[0] * dir[0] + dir[1] * dir[1], 1.0, 1e-12);
  EXPECT_EQ(ppursuit_result_direction(r, 2, dir, 2), PPURSUIT_E_PARAM);
  double est = 0.0, stat = 0.0;
  int accept = -1;
  ASSERT_EQ(ppursuit_result_estimate(r, 0, &est, &stat, &accept), PPURSUIT_OK);
  EXPECT_TRUE(accept == 0 || accept == 1);
  const double x[2] = {-5.0, 0.0};
  double dens0 = 0.0, dens1 = 0.0;
  ASSERT_EQ(ppursuit_result_density(r, 0, x, 2, &dens0), PPURSUIT_OK);
  ASSERT_EQ(ppursuit_result_density(r, 1, x, 2, &dens1), PPURSUIT_OK);
  EXPECT_GT(dens0, 0.0);
  EXPECT_GT(dens1, 0.0);
  EXPECT_EQ(ppursuit_result_density(r, 1, x, 3, &dens1), PPURSUIT_E_DIMENSION_MISMATCH);
  char* json = nullptr;
  ASSERT_EQ(ppursuit_result_to_json(r, &json), PPURSUIT_OK);
  EXPECT_NE(std::string(json).find("ppursuit.result/1"), std::string::npos);
  ppursuit_string_free(json);

  // Same inputs, same bytes.
  ppursuit_result* again = nullptr;
  ASSERT_EQ(ppursuit_pursue(data, cfg, &again), PPURSUIT_OK);
  char* j1 = nullptr;
  char* j2 = nullptr;
  ppursuit_result_to_json(r, &j1);
  ppursuit_result_to_json(again, &j2);
  EXPECT_STREQ(j1, j2);
  ppursuit_string_free(j1);
  ppursuit_string_free(j2);
  ppursuit_result_free(again);
  ppursuit_result_free(r);
  ppursuit_config_free(cfg);
  ppursuit_matrix_free(data);
}

TEST(CApi, NumericalFailureStatus) {
  const double same[] = {1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0};
  ppursuit_matrix* data = nullptr;
  ASSERT_EQ(ppursuit_matrix_create(4, 2, same, &data), PPURSUIT_OK);
  ppursuit_config* cfg = nullptr;
  ppursuit_config_create(&cfg);
  ppursuit_result* r = nullptr;
  const int status = ppursuit_pursue(data, cfg, &r);
  EXPECT_EQ(status, PPURSUIT_E_SINGULAR_COVARIANCE) << ppursuit_status_name(status);
  EXPECT_FALSE(ppursuit_status_is_config_error(status));
  EXPECT_EQ(r, nullptr);
  ppursuit_config_free(cfg);
  ppursuit_matrix_free(data);
}

TEST(CApi, SimulateWritesArtifacts) {
  const fs::path dir = scratch("simulate");
  ppursuit_artifacts* art = nullptr;
  const int status = ppursuit_simulate(
      "sim44", "{\"n\": 120, \"pursuit\": {\"anneal\": {\"steps\": 200, \"restarts\": 1}, \"bootstrap_replicates\": 20}}",
      dir.string().c_str(), &art);
  ASSERT_EQ(status, PPURSUIT_OK) << ppursuit_last_error();
  EXPECT_TRUE(fs::exists(ppursuit_artifacts_result_file(art)));
  EXPECT_TRUE(fs::exists(ppursuit_artifacts_log(art)));
  ASSERT_GE(ppursuit_artifacts_grid_count(art), 1u);
  for (size_t i = 0; i < ppursuit_artifacts_grid_count(art); ++i)
    EXPECT_TRUE(fs::exists(ppursuit_artifacts_grid_file(art, i)));
  char* doc = nullptr;
  ASSERT_EQ(ppursuit_artifacts_document(art, &doc), PPURSUIT_OK);
  EXPECT_NE(std::string(doc).find("\"copula\""), std::string::npos);
  ppursuit_string_free(doc);

  char* problems = nullptr;
  ASSERT_EQ(ppursuit_validate_result_file(ppursuit_artifacts_result_file(art), &problems), PPURSUIT_OK);
  EXPECT_STREQ(problems, "");
  ppursuit_string_free(problems);

  const std::string grid = (dir / "grid.csv").string();
  EXPECT_EQ(ppursuit_emit_grid(ppursuit_artifacts_result_file(art),
                               "{\"axes\": [0, 1], \"mins\": [-3, 0], \"maxs\": [3, 2], \"counts\": [4, 5], "
                               "\"fixed\": [0, 0]}",
                               -1, grid.c_str()),
            PPURSUIT_OK);
  ppursuit_matrix* g = nullptr;
  ASSERT_EQ(ppursuit_matrix_read_csv(grid.c_str(), ',', 1, &g), PPURSUIT_OK);
  EXPECT_EQ(ppursuit_matrix_rows(g), 20u);
  EXPECT_EQ(ppursuit_matrix_cols(g), 3u);
  ppursuit_matrix_free(g);
  ppursuit_artifacts_free(art);

  EXPECT_EQ(ppursuit_simulate("no-such-scenario", nullptr, dir.string().c_str(), &art), PPURSUIT_E_CONFIG);
}

TEST(CApi, AnalyzeCsvAndScenarioListing) {
  const fs::path dir = scratch("analyze");
  const std::vector<double> v = gumbel_normal(100, 8);
  {
    std::ofstream out(dir / "data.csv");
    out << "g,z\n";
    for (size_t i = 0; i < v.size(); i += 2) out << v[i] << "," << v[i + 1] << "\n";
  }
  ppursuit_artifacts* art = nullptr;
  const std::string req =
      "{\"analysis\": \"pursuit\", \"pursuit\": {\"max_k\": 1, \"anneal\": {\"steps\": 100, \"restarts\": 1}}}";
  ASSERT_EQ(ppursuit_analyze_csv((dir / "data.csv").string().c_str(), req.c_str(), (dir / "out").string().c_str(), &art),
            PPURSUIT_OK)
      << ppursuit_last_error();
  ppursuit_artifacts_free(art);
  EXPECT_EQ(ppursuit_analyze_csv((dir / "data.csv").string().c_str(), "{\"analysis\": \"dance\"}",
                                 (dir / "out").string().c_str(), &art),
            PPURSUIT_E_CONFIG);

  char* names = nullptr;
  ASSERT_EQ(ppursuit_scenario_names(&names), PPURSUIT_OK);
  EXPECT_NE(std::string(names).find("sim41\n"), std::string::npos);
  ppursuit_string_free(names);
  char* js = nullptr;
  ASSERT_EQ(ppursuit_scenario_json("sim42", &js), PPURSUIT_OK);
  EXPECT_NE(std::string(js).find("\"hellinger\""), std::string::npos);
  ppursuit_string_free(js);
}
