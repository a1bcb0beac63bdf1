#include "hifreq/core/error.hpp"

namespace hifreq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroDim: return "ZeroDim";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::BadSpacing: return "BadSpacing";
    case ErrorCode::NoSamples: return "NoSamples";
    case ErrorCode::ParallelRays: return "ParallelRays";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::OddSize: return "OddSize";
    case ErrorCode::BadSize: return "BadSize";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::PatchTooLarge: return "PatchTooLarge";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ArchMismatch: return "ArchMismatch";
    case ErrorCode::BadPatch: return "BadPatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace hifreq
