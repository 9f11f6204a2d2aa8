#include "qplab/error.hpp"

namespace qplab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RationalInput: return "RationalInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::OutOfAnnulus: return "OutOfAnnulus";
    case ErrorKind::PoleProximity: return "PoleProximity";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::KernelDecay: return "KernelDecay";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::BadRadii: return "BadRadii";
    case ErrorKind::PoleTooClose: return "PoleTooClose";
    case ErrorKind::NormalizationError: return "NormalizationError";
    case ErrorKind::DepthExceeded: return "DepthExceeded";
    case ErrorKind::SingularWindow: return "SingularWindow";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::AllSingular: return "AllSingular";
    case ErrorKind::BadSizes: return "BadSizes";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace qplab
