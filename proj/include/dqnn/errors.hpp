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

#include <stdexcept>
#include <string>

namespace dqnn {

/// Operand shapes do not match (qubit counts, matrix dimensions, vector lengths).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity that must be real came out with a significant imaginary part.
class NonHermitianError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Dense oracle refused a system above its memory guard.
class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A Markov chain rejected every proposal; the target weights are degenerate.
class ChainStuckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Division by a vanishing density-matrix element or norm.
class ZeroWeightError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite numbers reached a solver input.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace dqnn
