// dplab: scenario runner. Exit 0 when the run meets its expectation, 2 when an
// assertion fails, 1 on configuration or admissibility errors.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dplab/errors.hpp"
#include "dplab/experiments.hpp"
#include "dplab/scenario.hpp"

using namespace dplab;

namespace {

struct Common {
  std::string config, out;
  long paths = 0;
  long long seed = -1;
  unsigned threads = 0;
};

ScenarioConfig load(const Common& o) {
  ScenarioConfig c = load_scenario(o.config);
  if (o.paths > 0) c.mc.paths = o.paths;
  if (o.seed >= 0) c.mc.seed = static_cast<std::uint64_t>(o.seed);
  if (o.threads > 0) c.mc.threads = o.threads;
  if (!o.out.empty()) c.outputs.dir = o.out;
  if (c.mc.paths < 2) throw ConfigError("--paths must be at least 2");
  return c;
}

void add_common(CLI::App* app, Common& o) {
  app->add_option("--config", o.config, "scenario file (.toml or .json)")->required()->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "output directory (default: outputs.dir)");
  app->add_option("--paths", o.paths, "override mc.paths");
  app->add_option("--seed", o.seed, "override mc.seed");
  app->add_option("--threads", o.threads, "worker threads (0: DPLAB_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dplab: default-time portfolio lab"};
  app.require_subcommand(1);
  Common o;
  std::map<std::string, bool> flags;
  for (const auto& [k, _] : verify_tests()) flags[k] = false;

  std::vector<CLI::App*> subs;
  for (const char* name : {"simulate", "solve", "verify", "chaos-check", "drift-scan", "emit"}) {
    auto* s = app.add_subcommand(name);
    add_common(s, o);
    subs.push_back(s);
  }
  subs[0]->description("simulate wealth paths and estimate the objective");
  subs[1]->description("build the optimal strategy and check first-order residuals");
  subs[2]->description("statistical verification tests");
  subs[3]->description("chaos identity suite and norm checks");
  subs[4]->description("G-drift regressions");
  subs[5]->description("print the canonical form of a scenario");
  for (auto& [k, v] : flags) subs[2]->add_flag("--" + k, v, "run the " + k + " test");

  CLI11_PARSE(app, argc, argv);

  try {
    const ScenarioConfig c = load(o);
    std::string sub;
    for (auto* s : subs)
      if (*s) sub = s->get_name();
    if (sub == "emit") {
      std::cout << emit_toml(c);
      return 0;
    }
    std::vector<std::string> selected;
    for (const auto& [k, v] : flags)
      if (v) selected.push_back(k);
    return run_subcommand(c, sub, selected).exit_code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const AdmissibilityError& e) {
    std::fprintf(stderr, "inadmissible scenario: %s\n", e.what());
  } catch (const NoAdmissibleOptimum& e) {
    std::fprintf(stderr, "no admissible optimum: %s\n", e.what());
  } catch (const Unsupported& e) {
    std::fprintf(stderr, "unsupported: %s\n", e.what());
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "output error: %s\n", e.what());
  }
  return 1;
}
