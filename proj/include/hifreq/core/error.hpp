#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hifreq {

enum class ErrorCode {
  ZeroDim,
  NonFinite,
  InvalidArgument,
  BadParams,
  EmptyRange,
  DegenerateGrid,
  SizeMismatch,
  BadSpacing,
  NoSamples,
  ParallelRays,
  SingularSystem,
  ShapeMismatch,
  OddSize,
  BadSize,
  EmptyMask,
  DegenerateImage,
  PatchTooLarge,
  EmptyDataset,
  ArchMismatch,
  BadPatch,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for every module; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}

}  // namespace hifreq
