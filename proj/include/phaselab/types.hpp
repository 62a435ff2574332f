// Copyright 2026 The phaselab Authors
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

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace phaselab {

using Real = double;
using Complex = std::complex<double>;

using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

enum class ErrorKind {
  NonSymmetricCovariance,
  NonPositiveCovariance,
  InsufficientDomain,
  BadGridSize,
  WrongRepresentation,
  UnnormalizedState,
  SpecMismatch,
  RepresentationMismatch,
  UnknownSubsystem,
  DegreeTooHigh,
  DomainOverflow,
  GridMismatch,
  UnderflowRegion,
  NotNormalized,
  OrderOverflow,
  UnstableStep,
  BoundaryEscape,
  StepTooLarge,
  FactorMismatch,
  NonHermitianInput,
  DimensionCap,
  NonPhysicalState,
  SchemaViolation,
  UnknownVersion,
  IoFailure,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline constexpr Real kPi = 3.14159265358979323846;

}  // namespace phaselab
