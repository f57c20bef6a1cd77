#include "mrftid/error.hpp"

namespace mrftid {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidFrequency: return "InvalidFrequency";
    case ErrorCode::DegenerateDrag: return "DegenerateDrag";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NoOscillation: return "NoOscillation";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::SamplingError: return "SamplingError";
    case ErrorCode::SeriesNotConverged: return "SeriesNotConverged";
    case ErrorCode::NoLimitCycle: return "NoLimitCycle";
    case ErrorCode::CellSolveFailed: return "CellSolveFailed";
    case ErrorCode::OutOfGridRange: return "OutOfGridRange";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptManifold: return "CorruptManifold";
    case ErrorCode::StaleManifold: return "StaleManifold";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::NoFeasibleEstimate: return "NoFeasibleEstimate";
    case ErrorCode::NoAmplitudeMatch: return "NoAmplitudeMatch";
    case ErrorCode::UnreliableStatistics: return "UnreliableStatistics";
    case ErrorCode::NoStepDetected: return "NoStepDetected";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotConverged: return 3;
    case ErrorCode::NoOscillation: return 4;
    case ErrorCode::Diverged: return 5;
    case ErrorCode::InvalidParameter: return 6;
    case ErrorCode::InvalidFrequency: return 7;
    case ErrorCode::DegenerateDrag: return 8;
    case ErrorCode::FormatError: return 9;
    case ErrorCode::SamplingError: return 10;
    case ErrorCode::SeriesNotConverged: return 11;
    case ErrorCode::NoLimitCycle: return 12;
    case ErrorCode::CellSolveFailed: return 13;
    case ErrorCode::OutOfGridRange: return 14;
    case ErrorCode::UnsupportedVersion: return 15;
    case ErrorCode::CorruptManifold: return 16;
    case ErrorCode::StaleManifold: return 17;
    case ErrorCode::NoIntersection: return 18;
    case ErrorCode::NoFeasibleEstimate: return 19;
    case ErrorCode::NoAmplitudeMatch: return 20;
    case ErrorCode::UnreliableStatistics: return 21;
    case ErrorCode::NoStepDetected: return 22;
    case ErrorCode::IoError: return 23;
  }
  return 1;
}

}  // namespace mrftid
