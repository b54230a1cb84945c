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

#include "tcnqs/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace tcnqs {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {
constexpr char kMagic[8] = {'T', 'C', 'C', 'K', 'P', 'T', '1', '\n'};
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["format_version"] = ckpt.format_version;
  header["kind"] = ansatz_kind_name(ckpt.config.ansatz.kind);
  header["config"] = ckpt.config.echo();
  header["L"] = ckpt.config.L;
  header["h"] = {{"hx", ckpt.config.h.hx},
                 {"hy", ckpt.config.h.hy},
                 {"hz", ckpt.config.h.hz}};
  header["seed"] = ckpt.config.master_seed;
  header["iteration"] = ckpt.iteration;
  header["n_parameters"] = ckpt.parameters.size();
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint: " + path);
  }
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), std::streamsize(text.size()));
  out.write(reinterpret_cast<const char*>(ckpt.parameters.data()),
            std::streamsize(std::size_t(ckpt.parameters.size()) *
                            sizeof(std::complex<double>)));
  if (!out) {
    throw std::runtime_error("short write on checkpoint: " + path);
  }
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path);
  }
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic, sizeof(magic)) != std::string(kMagic, sizeof(kMagic))) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string text(len, ' ');
  in.read(text.data(), std::streamsize(len));
  if (!in) {
    throw std::runtime_error("truncated checkpoint header: " + path);
  }
  const nlohmann::json header = nlohmann::json::parse(text);

  Checkpoint ckpt;
  ckpt.format_version = header.at("format_version").get<int>();
  if (ckpt.format_version != 1) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(ckpt.format_version));
  }
  ckpt.config = RunConfig::from_echo(header.at("config"));
  ckpt.iteration = header.at("iteration").get<int>();
  const Eigen::Index n = header.at("n_parameters").get<Eigen::Index>();
  ckpt.parameters.resize(n);
  in.read(reinterpret_cast<char*>(ckpt.parameters.data()),
          std::streamsize(std::size_t(n) * sizeof(std::complex<double>)));
  if (!in) {
    throw std::runtime_error("truncated checkpoint parameters: " + path);
  }
  return ckpt;
}

}  // namespace tcnqs
