#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ldtail/config.hpp"
#include "ldtail/expression.hpp"
#include "ldtail/pipeline.hpp"

using namespace ldtail;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return {};
}

RunConfig from_json(const Json& j) {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [k, v] : j.items()) entries.emplace_back(k, v.get<std::string>());
  return make_config(entries);
}

}  // namespace

TEST(ConfigText, ParsesCommentsAndWhitespace) {
  auto cfg = parse_config("# header\n\n  grid.n = 33   # trailing\nasymptotics.sigma=0.2\r\n");
  EXPECT_EQ(cfg.n, std::vector<std::size_t>{33});
  EXPECT_EQ(cfg.params.sigma, 0.2);
  EXPECT_EQ(cfg.params.b, std::pow(0.2, 0.5));
  EXPECT_EQ(cfg.get("grid.n"), "33");
  EXPECT_EQ(cfg.get("mc.n"), "10000");
}

TEST(ConfigText, RejectsMalformedInput) {
  EXPECT_NE(error_of("grid.n 33\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("grid.n = 33\ngrid.n = 65\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("grid.size = 3\n").find("grid.size"), std::string::npos);
  EXPECT_NE(error_of("= 3\n").find("empty key"), std::string::npos);
}

TEST(ConfigValidation, ErrorsNameTheKey) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"asymptotics.alpha = 1.5", "asymptotics.alpha"},
      {"asymptotics.sigma = -1", "asymptotics.sigma"},
      {"asymptotics.kappa = abc", "asymptotics.kappa"},
      {"grid.n = 2", "grid.n"},
      {"grid.bounds = 1,0", "grid.bounds"},
      {"grid.n = 9,9", "grid.n"},
      {"kernel.kind = matern", "kernel.kind"},
      {"kernel.length_scale = 0", "kernel.length_scale"},
      {"functional.kind = max", "functional.kind"},
      {"pde.a0 = sin", "pde.a0"},
      {"optimizer.tol_xi = 0", "optimizer.tol_xi"},
      {"optimizer.holder_beta = 2", "optimizer.holder_beta"},
      {"mc.n = 0", "mc.n"},
      {"mc.workers = 0", "mc.workers"},
      {"mc.method = adaptive", "mc.method"},
      {"output.emit_fields = yes", "output.emit_fields"},
      {"sweep.sigmas = 0.1,-1", "sweep.sigmas"},
  };
  for (const auto& [text, key] : cases) {
    const std::string msg = error_of(text + "\n");
    EXPECT_NE(msg.find(key), std::string::npos) << text << " -> '" << msg << "'";
  }
}

TEST(ConfigValidation, TwoDimensionalGrid) {
  auto cfg = parse_config("grid.bounds = 0,1;0,2\ngrid.n = 9,17\n");
  auto p = make_problem(cfg);
  EXPECT_EQ(p.grid()->dim(), 2);
  EXPECT_EQ(p.grid()->size(), 9u * 17u);
}

TEST(Expression, Menu) {
  auto g = build_grid({{0.0, 1.0}, {0.0, 1.0}}, {5, 5});
  EXPECT_EQ(parse_field_expression(g, "constant:2.5")[7], 2.5);
  auto opx = parse_field_expression(g, "one_plus_x");
  auto bump = parse_field_expression(g, "x_times_one_minus_x");
  const std::size_t i = g->linear_index(1, 2);
  EXPECT_DOUBLE_EQ(opx[i], 1.25);
  EXPECT_DOUBLE_EQ(bump[i], 0.25 * 0.75 * 0.5 * 0.5);
  EXPECT_THROW(parse_field_expression(g, "constant:"), InvalidArgument);
  EXPECT_THROW(parse_field_expression(g, "constant:1x"), InvalidArgument);
  EXPECT_THROW(parse_field_expression(g, "exp(x)"), InvalidArgument);
}

TEST(Pipeline, SolveReportAndFields) {
  auto r = cmd_solve(parse_config("grid.n = 65\n"));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.json["G_at_0"].get<double>(), 0.0);
  EXPECT_GT(r.json["K_of_Gprime0"].get<double>(), 0.0);
  ASSERT_EQ(r.files.size(), 3u);
  EXPECT_EQ(r.files[0].first, "u0.csv");
  std::istringstream csv(r.files[0].second);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "x0,u0");
  for (int k = 0; k <= 32; ++k) std::getline(csv, line);
  const auto comma = line.find(',');
  EXPECT_EQ(std::stod(line.substr(0, comma)), 0.5);
  EXPECT_NEAR(std::stod(line.substr(comma + 1)), 0.125, 1e-10);

  auto quiet = cmd_solve(parse_config("output.emit_fields = false\n"));
  EXPECT_TRUE(quiet.files.empty());
}

TEST(Pipeline, OptimizeZeroLevel) {
  auto r = cmd_optimize(parse_config("asymptotics.kappa = 0\ngrid.n = 33\n"));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.json["optimizer"]["k_star"].get<double>(), 0.0);
}

TEST(Pipeline, OptimizeNonConvergenceIsReported) {
  auto r = cmd_optimize(parse_config("optimizer.max_outer = 1\nfunctional.kind = exp_integral\ngrid.n = 17\n"));
  EXPECT_FALSE(r.ok);
  ASSERT_TRUE(r.json.contains("error"));
  EXPECT_EQ(r.json["error"]["trace"].size(), 1u);
}

TEST(Pipeline, DeterministicAndReproducibleFromEmbeddedConfig) {
  const std::string text =
      "functional.kind = exp_integral\ngrid.n = 33\nasymptotics.sigma = 0.2\nmc.n = 3000\nmc.method = both\n";
  const auto first = cmd_estimate(parse_config(text)).json.dump(2);
  const auto second = cmd_estimate(parse_config(text)).json.dump(2);
  EXPECT_EQ(first, second);
  const auto replay = cmd_estimate(from_json(Json::parse(first)["config"])).json.dump(2);
  EXPECT_EQ(first, replay);
}

TEST(Pipeline, CrudeRatioAtModerateSigma) {
  auto r = cmd_estimate(parse_config(
      "functional.kind = exp_integral\nasymptotics.sigma = 0.3\nmc.method = crude\nmc.n = 20000\n"));
  ASSERT_TRUE(r.ok);
  const double ratio = r.json["ratio"]["crude"].get<double>();
  EXPECT_GE(ratio, 0.5);
  EXPECT_LE(ratio, 2.0);
}

TEST(Pipeline, SweepRecordsPerSigma) {
  auto r = cmd_sweep(parse_config("functional.kind = exp_integral\ngrid.n = 17\nmc.n = 500\nsweep.sigmas = 0.2,0.1\n"));
  EXPECT_TRUE(r.ok);
  ASSERT_EQ(r.json["records"].size(), 2u);
  EXPECT_EQ(r.json["records"][1]["sigma"].get<double>(), 0.1);
  EXPECT_TRUE(r.json["records"][0].contains("ratio"));
  EXPECT_EQ(r.files.size(), 2u);
}

TEST(Pipeline, WritesReportAndSideFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "ldtail_config_test";
  std::filesystem::remove_all(dir);
  auto r = run_command("estimate", parse_config("functional.kind = exp_integral\ngrid.n = 17\nmc.n = 200\n"
                                                "output.emit_samples = true\n"));
  write_report(r, dir.string());
  EXPECT_TRUE(std::filesystem::exists(dir / "estimate.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "xi_star.csv"));
  std::ifstream samples(dir / "samples_importance.csv");
  std::string header;
  std::getline(samples, header);
  EXPECT_EQ(header, "sample_index,G_value,indicator,log_weight");
  std::filesystem::remove_all(dir);
  EXPECT_THROW(run_command("plot", parse_config("")), InvalidArgument);
}
