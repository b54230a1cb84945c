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

#include "tcnqs/config_file.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tcnqs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string cell;
  while (std::getline(is, cell, sep)) out.push_back(trim(cell));
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    }
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key,
                                   const std::string& fallback) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  if (!has(section, key)) return fallback;
  return std::stod(get_string(section, key, ""));
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
  if (!has(section, key)) return fallback;
  return std::stoi(get_string(section, key, ""));
}

std::uint64_t ConfigFile::get_u64(const std::string& section,
                                  const std::string& key,
                                  std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  return std::stoull(get_string(section, key, ""));
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: bad boolean '" + v + "' for " + section +
                              "." + key);
}

std::vector<int> ConfigFile::get_int_list(const std::string& section,
                                          const std::string& key,
                                          const std::vector<int>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<int> out;
  for (const auto& cell : split(get_string(section, key, ""), ',')) {
    if (!cell.empty()) out.push_back(std::stoi(cell));
  }
  return out;
}

std::vector<double> ConfigFile::get_double_list(
    const std::string& section, const std::string& key,
    const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  for (const auto& cell : split(get_string(section, key, ""), ',')) {
    if (!cell.empty()) out.push_back(std::stod(cell));
  }
  return out;
}

// ---------------------------------------------------------------------------

RunConfig RunConfig::from_file(const std::string& path) {
  return from_config(ConfigFile::parse_file(path));
}

RunConfig RunConfig::from_config(const ConfigFile& f) {
  RunConfig c;
  c.L = f.get_int("run", "L", c.L);
  c.h.hx = f.get_double("run", "hx", c.h.hx);
  c.h.hy = f.get_double("run", "hy", c.h.hy);
  c.h.hz = f.get_double("run", "hz", c.h.hz);
  c.master_seed = f.get_u64("run", "seed", c.master_seed);
  c.out_dir = f.get_string("run", "out", c.out_dir);

  c.ansatz.kind = ansatz_kind_from_name(f.get_string("ansatz", "kind", "combo"));
  const std::string domain = f.get_string("ansatz", "params", "auto");
  if (domain == "real") {
    c.ansatz.complex_params = false;
  } else if (domain == "complex") {
    c.ansatz.complex_params = true;
  } else if (domain == "auto") {
    c.ansatz.complex_params = (c.h.hy != 0.0);
  } else {
    throw std::invalid_argument("ansatz.params must be real, complex or auto");
  }
  c.ansatz.nib_channels =
      f.get_int_list("ansatz", "nib_channels", c.ansatz.nib_channels);
  c.ansatz.nib_kernel = f.get_int("ansatz", "nib_kernel", c.ansatz.nib_kernel);
  c.ansatz.ib_channels =
      f.get_int_list("ansatz", "ib_channels", c.ansatz.ib_channels);
  c.ansatz.ib_kernel = f.get_int("ansatz", "ib_kernel", c.ansatz.ib_kernel);
  c.ansatz.rbm_alpha = f.get_double("ansatz", "rbm_alpha", c.ansatz.rbm_alpha);
  c.ansatz.seed = f.get_u64("ansatz", "seed", c.master_seed);

  c.sampler.n_chains = f.get_int("sampler", "chains", c.sampler.n_chains);
  c.sampler.n_burn_in = f.get_int("sampler", "burn_in", c.sampler.n_burn_in);
  c.sampler.n_subsample =
      f.get_int("sampler", "subsample", c.sampler.n_subsample);
  c.sampler.samples_per_chain =
      f.get_int("sampler", "samples_per_chain", c.sampler.samples_per_chain);

  c.optimizer.learning_rate =
      f.get_double("optimizer", "learning_rate", c.optimizer.learning_rate);
  c.optimizer.diag_shift =
      f.get_double("optimizer", "diag_shift", c.optimizer.diag_shift);
  c.optimizer.svd_cutoff =
      f.get_double("optimizer", "svd_cutoff", c.optimizer.svd_cutoff);
  c.optimizer.max_iterations =
      f.get_int("optimizer", "iterations", c.optimizer.max_iterations);
  c.early_stop_window =
      f.get_int("optimizer", "early_stop_window", c.early_stop_window);

  const std::string sched = f.get_string("schedule", "type", "standard");
  if (sched == "standard") {
    c.schedule = ScheduleKind::standard;
  } else if (sched == "two_step") {
    c.schedule = ScheduleKind::two_step;
    c.step1_h.hx = f.get_double("schedule", "step1_hx", 0.0);
    c.step1_h.hy = f.get_double("schedule", "step1_hy", 0.0);
    c.step1_h.hz = f.get_double("schedule", "step1_hz", 0.0);
    c.step2_h.hx = f.get_double("schedule", "step2_hx", 0.0);
    c.step2_h.hy = f.get_double("schedule", "step2_hy", 0.0);
    c.step2_h.hz = f.get_double("schedule", "step2_hz", 0.0);
    c.step1_iterations = f.get_int("schedule", "step1_iterations", 0);
    c.step2_iterations = f.get_int("schedule", "step2_iterations", 0);
  } else {
    throw std::invalid_argument("schedule.type must be standard or two_step");
  }

  for (const auto& spec :
       f.get_double_list("observables", "bffm_perimeters", {})) {
    c.observables.bffm.push_back({int(spec), LatticeKind::primal});
  }
  for (const auto& spec :
       f.get_double_list("observables", "bffm_dual_perimeters", {})) {
    c.observables.bffm.push_back({int(spec), LatticeKind::dual});
  }
  c.observables.renyi = f.get_bool("observables", "renyi", c.observables.renyi);
  c.observables.invariance_cadence = f.get_int(
      "observables", "invariance_cadence", c.observables.invariance_cadence);
  c.observables.final_sample_factor = f.get_int(
      "observables", "final_sample_factor", c.observables.final_sample_factor);

  c.checkpoint_interval =
      f.get_int("output", "checkpoint_interval", c.checkpoint_interval);
  c.final_exact_energy_auto =
      f.get_bool("output", "exact_energy", c.final_exact_energy_auto);
  return c;
}

void RunConfig::validate() const {
  if (L < 2) {
    throw std::invalid_argument("run.L must be >= 2");
  }
  sampler.validate();
  optimizer.validate();
  const bool needs_complex =
      h.hy != 0.0 || (schedule == ScheduleKind::two_step &&
                      (step1_h.hy != 0.0 || step2_h.hy != 0.0));
  if (needs_complex && !ansatz.complex_params) {
    throw std::invalid_argument(
        "a Hamiltonian with hy != 0 has a sign problem and requires complex "
        "parameters (set ansatz.params = complex)");
  }
  if (schedule == ScheduleKind::two_step) {
    if (ansatz.kind == AnsatzKind::rbm) {
      throw std::invalid_argument(
          "the two-step schedule needs the combo or rpp block partition");
    }
    if (step1_iterations < 1 || step2_iterations < 1) {
      throw std::invalid_argument("two_step schedule needs step iterations");
    }
  }
  if (checkpoint_interval < 1) {
    throw std::invalid_argument("output.checkpoint_interval must be >= 1");
  }
}

namespace {

nlohmann::json fields_echo(const FieldParameters& h) {
  return {{"hx", h.hx}, {"hy", h.hy}, {"hz", h.hz}};
}

FieldParameters fields_from_echo(const nlohmann::json& j) {
  FieldParameters h;
  h.hx = j.value("hx", 0.0);
  h.hy = j.value("hy", 0.0);
  h.hz = j.value("hz", 0.0);
  return h;
}

}  // namespace

nlohmann::json RunConfig::echo() const {
  nlohmann::json j;
  j["L"] = L;
  j["h"] = fields_echo(h);
  j["ansatz"] = {{"kind", ansatz_kind_name(ansatz.kind)},
                 {"complex", ansatz.complex_params},
                 {"nib_channels", ansatz.nib_channels},
                 {"nib_kernel", ansatz.nib_kernel},
                 {"ib_channels", ansatz.ib_channels},
                 {"ib_kernel", ansatz.ib_kernel},
                 {"rbm_alpha", ansatz.rbm_alpha},
                 {"seed", ansatz.seed}};
  j["sampler"] = {{"chains", sampler.n_chains},
                  {"burn_in", sampler.n_burn_in},
                  {"subsample", sampler.n_subsample},
                  {"samples_per_chain", sampler.samples_per_chain}};
  j["optimizer"] = {{"learning_rate", optimizer.learning_rate},
                    {"diag_shift", optimizer.diag_shift},
                    {"svd_cutoff", optimizer.svd_cutoff},
                    {"iterations", optimizer.max_iterations},
                    {"early_stop_window", early_stop_window}};
  j["schedule"] = {{"type", schedule == ScheduleKind::standard ? "standard"
                                                               : "two_step"},
                   {"step1_h", fields_echo(step1_h)},
                   {"step2_h", fields_echo(step2_h)},
                   {"step1_iterations", step1_iterations},
                   {"step2_iterations", step2_iterations}};
  nlohmann::json bffm = nlohmann::json::array();
  for (const auto& [perimeter, kind] : observables.bffm) {
    bffm.push_back({{"perimeter", perimeter},
                    {"kind", kind == LatticeKind::primal ? "primal" : "dual"}});
  }
  j["observables"] = {{"bffm", bffm},
                      {"renyi", observables.renyi},
                      {"invariance_cadence", observables.invariance_cadence},
                      {"final_sample_factor", observables.final_sample_factor}};
  j["out_dir"] = out_dir;
  j["seed"] = master_seed;
  j["checkpoint_interval"] = checkpoint_interval;
  j["exact_energy"] = final_exact_energy_auto;
  return j;
}

RunConfig RunConfig::from_echo(const nlohmann::json& j) {
  RunConfig c;
  c.L = j.at("L").get<int>();
  c.h = fields_from_echo(j.at("h"));
  const auto& a = j.at("ansatz");
  c.ansatz.kind = ansatz_kind_from_name(a.at("kind").get<std::string>());
  c.ansatz.complex_params = a.at("complex").get<bool>();
  c.ansatz.nib_channels = a.at("nib_channels").get<std::vector<int>>();
  c.ansatz.nib_kernel = a.at("nib_kernel").get<int>();
  c.ansatz.ib_channels = a.at("ib_channels").get<std::vector<int>>();
  c.ansatz.ib_kernel = a.at("ib_kernel").get<int>();
  c.ansatz.rbm_alpha = a.at("rbm_alpha").get<double>();
  c.ansatz.seed = a.at("seed").get<std::uint64_t>();
  const auto& s = j.at("sampler");
  c.sampler.n_chains = s.at("chains").get<int>();
  c.sampler.n_burn_in = s.at("burn_in").get<int>();
  c.sampler.n_subsample = s.at("subsample").get<int>();
  c.sampler.samples_per_chain = s.at("samples_per_chain").get<int>();
  const auto& o = j.at("optimizer");
  c.optimizer.learning_rate = o.at("learning_rate").get<double>();
  c.optimizer.diag_shift = o.at("diag_shift").get<double>();
  c.optimizer.svd_cutoff = o.at("svd_cutoff").get<double>();
  c.optimizer.max_iterations = o.at("iterations").get<int>();
  c.early_stop_window = o.value("early_stop_window", 0);
  const auto& sch = j.at("schedule");
  c.schedule = sch.at("type").get<std::string>() == "two_step"
                   ? ScheduleKind::two_step
                   : ScheduleKind::standard;
  c.step1_h = fields_from_echo(sch.at("step1_h"));
  c.step2_h = fields_from_echo(sch.at("step2_h"));
  c.step1_iterations = sch.at("step1_iterations").get<int>();
  c.step2_iterations = sch.at("step2_iterations").get<int>();
  const auto& obs = j.at("observables");
  for (const auto& b : obs.at("bffm")) {
    c.observables.bffm.push_back(
        {b.at("perimeter").get<int>(),
         b.at("kind").get<std::string>() == "dual" ? LatticeKind::dual
                                                   : LatticeKind::primal});
  }
  c.observables.renyi = obs.at("renyi").get<bool>();
  c.observables.invariance_cadence = obs.at("invariance_cadence").get<int>();
  c.observables.final_sample_factor = obs.at("final_sample_factor").get<int>();
  c.out_dir = j.at("out_dir").get<std::string>();
  c.master_seed = j.at("seed").get<std::uint64_t>();
  c.checkpoint_interval = j.at("checkpoint_interval").get<int>();
  c.final_exact_energy_auto = j.value("exact_energy", true);
  return c;
}

}  // namespace tcnqs
