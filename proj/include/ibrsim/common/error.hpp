// Copyright 2026 The ibrsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ibrsim {

// Base of every error raised by the library. Subclasses name the failure
// kind so callers and tests can catch exactly what they expect.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define IBRSIM_DEFINE_ERROR(Name)         \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

IBRSIM_DEFINE_ERROR(InvalidPoseError);
IBRSIM_DEFINE_ERROR(BoundsError);
IBRSIM_DEFINE_ERROR(InvalidDirectionError);
IBRSIM_DEFINE_ERROR(ShapeError);
IBRSIM_DEFINE_ERROR(EmptySceneError);
IBRSIM_DEFINE_ERROR(DegenerateHullError);
IBRSIM_DEFINE_ERROR(UnreachableError);
IBRSIM_DEFINE_ERROR(EmptyDatasetError);
IBRSIM_DEFINE_ERROR(StateError);
IBRSIM_DEFINE_ERROR(FormatError);
IBRSIM_DEFINE_ERROR(IoError);
IBRSIM_DEFINE_ERROR(GenerationError);
IBRSIM_DEFINE_ERROR(DivergenceError);
IBRSIM_DEFINE_ERROR(InvalidArgumentError);
IBRSIM_DEFINE_ERROR(ProtocolError);

#undef IBRSIM_DEFINE_ERROR

// Raised when stochastic identity initialization runs out of steps.
class InitFailureError : public Error {
 public:
  InitFailureError(const std::string& what, double final_residual)
      : Error(what), final_residual_(final_residual) {}
  double final_residual() const { return final_residual_; }

 private:
  double final_residual_;
};

}  // namespace ibrsim
