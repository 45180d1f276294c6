// Copyright 2026 The dqnn Authors
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

#pragma once

#include "dqnn/qcore.hpp"

#include <string>
#include <vector>

namespace dqnn {

/// Metric S and force f of one update, as produced by any backend.
struct SrSystem {
  RealMatrix s;
  RealVector f;
  /// Standard errors, filled by sampling backends when requested.
  RealMatrix s_stderr;
  RealVector f_stderr;
  /// Conditions a caller should know about (e.g. an estimate that had to be clamped).
  std::vector<std::string> flags;

  Eigen::Index size() const { return f.size(); }
};

}  // namespace dqnn
