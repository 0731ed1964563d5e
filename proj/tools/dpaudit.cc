//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <string>

#include <CLI11.hpp>

#include "dpaudit/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dpaudit: distinguishing-game audits of DP synthetic-data "
               "generators"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::size_t workers = 1;

  CLI::App* audit = app.add_subcommand(
      "audit", "run one audit from a JSON config");
  audit->add_option("config", config_path, "audit config JSON")->required();
  audit->add_option("--out", out_dir, "output directory");
  audit->add_option("--workers", workers, "worker thread count");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "audit at each epsilon in the config's epsilon_list");
  sweep->add_option("config", config_path, "sweep config JSON")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--workers", workers, "worker thread count");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(audit)) {
    return dpaudit::cmd_audit(config_path, out_dir, workers);
  }
  return dpaudit::cmd_sweep(config_path, out_dir, workers);
}
