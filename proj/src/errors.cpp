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

#include "phaselab/types.hpp"

namespace phaselab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSymmetricCovariance: return "NonSymmetricCovariance";
    case ErrorKind::NonPositiveCovariance: return "NonPositiveCovariance";
    case ErrorKind::InsufficientDomain: return "InsufficientDomain";
    case ErrorKind::BadGridSize: return "BadGridSize";
    case ErrorKind::WrongRepresentation: return "WrongRepresentation";
    case ErrorKind::UnnormalizedState: return "UnnormalizedState";
    case ErrorKind::SpecMismatch: return "SpecMismatch";
    case ErrorKind::RepresentationMismatch: return "RepresentationMismatch";
    case ErrorKind::UnknownSubsystem: return "UnknownSubsystem";
    case ErrorKind::DegreeTooHigh: return "DegreeTooHigh";
    case ErrorKind::DomainOverflow: return "DomainOverflow";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::UnderflowRegion: return "UnderflowRegion";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::OrderOverflow: return "OrderOverflow";
    case ErrorKind::UnstableStep: return "UnstableStep";
    case ErrorKind::BoundaryEscape: return "BoundaryEscape";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::FactorMismatch: return "FactorMismatch";
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::DimensionCap: return "DimensionCap";
    case ErrorKind::NonPhysicalState: return "NonPhysicalState";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::UnknownVersion: return "UnknownVersion";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace phaselab
