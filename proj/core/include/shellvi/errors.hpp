#pragma once

#include <stdexcept>
#include <string>

namespace shellvi {

enum class ErrorKind {
  DegenerateFrame,
  InvalidBounds,
  InvalidLame,
  DegenerateDeformedFrame,
  EmptyGamma0,
  OddLayers,
  InvalidMesh,
  InfeasibleReference,
  MaxIterations,
  InfeasibleProblem,
  SingularMatrix,
  TooManyRows,
  ExtensionTooSmall,
  HypothesisFailed,
  EigenSolverStall,
  Config,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace shellvi
