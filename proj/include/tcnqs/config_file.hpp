// Copyright 2026 The tcnqs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TCNQS_CONFIG_FILE_HPP
#define TCNQS_CONFIG_FILE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcnqs/ansatz.hpp"
#include "tcnqs/hamiltonian.hpp"
#include "tcnqs/lattice.hpp"
#include "tcnqs/optimizer.hpp"
#include "tcnqs/sampler.hpp"

namespace tcnqs {

// Sectioned key = value text files:
//   [section]
//   key = value        # trailing comments allowed
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<int> get_int_list(const std::string& section,
                                const std::string& key,
                                const std::vector<int>& fallback) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key,
                                      const std::vector<double>& fallback) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class ScheduleKind { standard, two_step };

struct ObservableRequests {
  // (perimeter, kind) pairs measured in the final pass
  std::vector<std::pair<int, LatticeKind>> bffm;
  bool renyi = false;  // central 4-edge square region
  int invariance_cadence = 50;
  int final_sample_factor = 4;
};

// Everything one training run needs; round-trips through a JSON echo so run
// logs and checkpoints are self-describing.
struct RunConfig {
  int L = 3;
  FieldParameters h;
  AnsatzConfig ansatz;
  SamplerConfig sampler;
  SRConfig optimizer;

  ScheduleKind schedule = ScheduleKind::standard;
  FieldParameters step1_h, step2_h;
  int step1_iterations = 0;
  int step2_iterations = 0;

  ObservableRequests observables;
  std::string out_dir = "runs/out";
  std::uint64_t master_seed = 1;
  int checkpoint_interval = 500;
  // 0 disables; otherwise stop once the trailing-window energy improvement
  // drops below the energy standard error.
  int early_stop_window = 0;
  bool final_exact_energy_auto = true;  // exact-summation energy when N <= 20

  static RunConfig from_file(const std::string& path);
  static RunConfig from_config(const ConfigFile& file);
  void validate() const;
  nlohmann::json echo() const;
  static RunConfig from_echo(const nlohmann::json& j);
};

}  // namespace tcnqs

#endif  // TCNQS_CONFIG_FILE_HPP
