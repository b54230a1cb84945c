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

#ifndef TCNQS_CHECKPOINT_HPP
#define TCNQS_CHECKPOINT_HPP

#include <Eigen/Core>
#include <complex>
#include <string>

#include "tcnqs/config_file.hpp"

namespace tcnqs {

// Versioned binary checkpoint: a JSON header (format version, ansatz kind,
// config echo, geometry, fields, seed, iteration) followed by the parameter
// vector as little-endian IEEE-754 double (re, im) pairs in flat order.
// Real-parameter runs store zero imaginary parts.
struct Checkpoint {
  int format_version = 1;
  RunConfig config;
  int iteration = 0;
  Eigen::VectorXcd parameters;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace tcnqs

#endif  // TCNQS_CHECKPOINT_HPP
