#pragma once

#include <stdexcept>

namespace ppnn {

// Base for malformed or unreadable persisted files.
struct FileFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncated data, bad magic or checksum mismatch.
struct CorruptFile : FileFormatError {
  using FileFormatError::FileFormatError;
};

struct VersionMismatch : FileFormatError {
  using FileFormatError::FileFormatError;
};

}  // namespace ppnn
