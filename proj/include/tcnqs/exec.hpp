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

#ifndef TCNQS_EXEC_HPP
#define TCNQS_EXEC_HPP

namespace tcnqs {

// Every hot kernel (chain sampling, batch evaluation, Gram/force
// accumulation, ED matvec) comes in an OpenMP-parallel flavor and a plain
// serial reference used for testing.  Kernels parallelize over independent
// output slots and keep every per-element accumulation in a fixed order, so
// both flavors produce bit-identical results for any thread count.
enum class ExecMode { serial, parallel };

inline constexpr ExecMode kDefaultExec = ExecMode::parallel;

}  // namespace tcnqs

#endif  // TCNQS_EXEC_HPP
