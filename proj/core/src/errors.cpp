#include "shellvi/errors.hpp"

namespace shellvi {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateFrame: return "DegenerateFrame";
    case ErrorKind::InvalidBounds: return "InvalidBounds";
    case ErrorKind::InvalidLame: return "InvalidLame";
    case ErrorKind::DegenerateDeformedFrame: return "DegenerateDeformedFrame";
    case ErrorKind::EmptyGamma0: return "EmptyGamma0";
    case ErrorKind::OddLayers: return "OddLayers";
    case ErrorKind::InvalidMesh: return "InvalidMesh";
    case ErrorKind::InfeasibleReference: return "InfeasibleReference";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::InfeasibleProblem: return "InfeasibleProblem";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::TooManyRows: return "TooManyRows";
    case ErrorKind::ExtensionTooSmall: return "ExtensionTooSmall";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::EigenSolverStall: return "EigenSolverStall";
    case ErrorKind::Config: return "Config";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace shellvi
