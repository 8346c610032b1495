/*
 * Copyright 2026 The FedTrust Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedtrust/fedtrust.h"

namespace {

// Input and io failures have no dedicated exit code; they are reported as
// data errors.
int ExitCode(ft_status s) {
  switch (s) {
    case FT_OK:
      return 0;
    case FT_ERR_CONFIG:
      return 2;
    case FT_ERR_NUMERIC:
      return 4;
    case FT_ERR_DATA:
    case FT_ERR_INPUT:
    case FT_ERR_IO:
    case FT_ERR_METRIC_UNDEFINED:
      return 3;
    case FT_ERR_INTERNAL:
      return 1;
  }
  return 1;
}

int Fail(ft_status s) {
  std::fprintf(stderr, "fedtrust: %s: %s\n", ft_status_name(s),
               ft_last_error());
  return ExitCode(s);
}

struct ConfigHandle {
  ft_config* ptr = nullptr;
  ~ConfigHandle() { ft_config_free(ptr); }
};

ft_status LoadWithOverrides(const std::string& path,
                            const std::vector<std::string>& overrides,
                            ConfigHandle* out) {
  ft_status s = ft_config_load(path.c_str(), &out->ptr);
  if (s != FT_OK) return s;
  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "fedtrust: override must be key=value: %s\n",
                   kv.c_str());
      return FT_ERR_CONFIG;
    }
    s = ft_config_set(out->ptr, kv.substr(0, eq).c_str(),
                      kv.substr(eq + 1).c_str());
    if (s != FT_OK) return s;
  }
  return FT_OK;
}

int CmdRun(const std::string& path, const std::vector<std::string>& sets) {
  ConfigHandle cfg;
  ft_status s = LoadWithOverrides(path, sets, &cfg);
  if (s != FT_OK) return Fail(s);
  ft_run_summary summary{};
  s = ft_run(cfg.ptr, &summary);
  if (s != FT_OK) return Fail(s);
  std::printf("folds completed: %zu, failed: %zu\n", summary.folds_completed,
              summary.folds_failed);
  if (summary.folds_failed > 0) {
    std::fprintf(stderr, "fedtrust: %s\n", ft_last_error());
    return ExitCode(summary.first_failure);
  }
  return 0;
}

int CmdDemoFig1() {
  ft_fig1_result r{};
  const ft_status s = ft_demo_fig1(&r);
  if (s != FT_OK) return Fail(s);
  std::printf("perf = %.4f\n", r.perf);
  std::printf("gap = %.4f\n", r.gap);
  std::printf("fair = %.4f\n", r.fair);
  std::printf("attack success = %.4f\n", r.attack_success);
  std::printf("res = %.4f\n", r.res);
  if (!r.matches) {
    std::fprintf(stderr, "fedtrust: values deviate from reference\n");
    return 1;
  }
  return 0;
}

int CmdAnalyze(const std::string& run_dir) {
  const ft_status s = ft_analyze(run_dir.c_str());
  if (s != FT_OK) return Fail(s);
  std::printf("report written to %s\n", run_dir.c_str());
  return 0;
}

int CmdGenerateData(const std::string& spec, const std::string& out,
                    const std::vector<std::string>& sets) {
  ConfigHandle cfg;
  ft_status s = LoadWithOverrides(spec, sets, &cfg);
  if (s != FT_OK) return Fail(s);
  size_t rows = 0;
  s = ft_generate_data(cfg.ptr, out.c_str(), &rows);
  if (s != FT_OK) return Fail(s);
  std::printf("%zu rows written to %s\n", rows, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-metric client contribution scoring for federated "
               "learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ft_version()));

  std::string config_path, run_dir, spec_path, out_path;
  std::vector<std::string> run_sets, gen_sets;

  auto* run = app.add_subcommand("run", "Run a full experiment");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--set", run_sets, "Override a config key (key=value)");

  auto* demo = app.add_subcommand("demo-fig1", "Evaluate the 6-sample toy");

  auto* analyze =
      app.add_subcommand("analyze", "Rebuild the report from stored scores");
  analyze->add_option("run_dir", run_dir, "Run directory")->required();

  auto* gen = app.add_subcommand("generate-data", "Write a dataset as CSV");
  gen->add_option("spec", spec_path, "Config file with data.* keys")
      ->required();
  gen->add_option("out", out_path, "Output CSV path")->required();
  gen->add_option("--set", gen_sets, "Override a config key (key=value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*run) return CmdRun(config_path, run_sets);
  if (*demo) return CmdDemoFig1();
  if (*analyze) return CmdAnalyze(run_dir);
  if (*gen) return CmdGenerateData(spec_path, out_path, gen_sets);
  return 2;
}
