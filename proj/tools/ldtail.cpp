// Command-line front end: ldtail {solve|optimize|estimate|sweep} --config FILE

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ldtail/pipeline.hpp"

namespace {

int run(const std::string& command, const std::string& config_path, const std::optional<std::string>& output,
        const std::optional<long long>& seed, bool quiet) {
  using namespace ldtail;
  RunConfig cfg;
  try {
    std::ifstream is(config_path);
    if (!is) throw InvalidArgument("cannot open config file '" + config_path + "'");
    auto entries = parse_config_text(is);
    auto set = [&](const std::string& key, const std::string& value) {
      for (auto& [k, v] : entries) {
        if (k == key) {
          v = value;
          return;
        }
      }
      entries.emplace_back(key, value);
    };
    if (output) set("output.dir", *output);
    if (seed) set("mc.seed", std::to_string(*seed));
    cfg = make_config(entries);
  } catch (const std::exception& e) {
    std::cerr << "ldtail: config error: " << e.what() << '\n';
    return 2;
  }

  Report report;
  try {
    report = run_command(command, cfg);
  } catch (const std::exception& e) {
    std::cerr << "ldtail: " << command << " failed: " << e.what() << '\n';
    return 1;
  }
  try {
    write_report(report, cfg.output_dir);
  } catch (const std::exception& e) {
    std::cerr << "ldtail: cannot write report to '" << cfg.output_dir << "': " << e.what() << '\n';
    return 1;
  }
  if (!quiet) std::cout << report.json.dump(2) << '\n';
  if (!report.ok) {
    std::cerr << "ldtail: " << command << " did not converge: " << report.json.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-noise tail probabilities for elliptic PDEs with lognormal coefficients"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output;
  std::optional<long long> seed;
  bool quiet = false;
  std::string chosen;

  for (const auto& [name, help] : {
           std::pair{"solve", "deterministic solve at w = 0: u0, g0, G'[0], prefactor"},
           std::pair{"optimize", "dominating point xi* of the constrained minimization"},
           std::pair{"estimate", "tail formula plus Monte Carlo references"},
           std::pair{"sweep", "estimate at every sigma in sweep.sigmas"},
       }) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value config file")->required();
    sub->add_option("--output", output, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
    sub->add_flag("--quiet", quiet, "do not print the JSON report");
    sub->callback([&chosen, n = std::string(name)] { chosen = n; });
  }

  CLI11_PARSE(app, argc, argv);
  return run(chosen, config_path, output, seed, quiet);
}
