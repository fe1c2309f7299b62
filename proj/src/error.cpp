#include "percolab/error.hpp"

namespace percolab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidAperture: return "InvalidAperture";
    case ErrorKind::IllPosedEvent: return "IllPosedEvent";
    case ErrorKind::DirectionOutsideCone: return "DirectionOutsideCone";
    case ErrorKind::NotConnected: return "NotConnected";
    case ErrorKind::ZeroNotInCluster: return "ZeroNotInCluster";
    case ErrorKind::NotReconstructible: return "NotReconstructible";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::AllFailures: return "AllFailures";
    case ErrorKind::EmptyTable: return "EmptyTable";
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::MissingDirection: return "MissingDirection";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::SubcriticalityDoubt: return "SubcriticalityDoubt";
    case ErrorKind::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

}  // namespace percolab
