#pragma once

#include <stdexcept>
#include <string>

namespace dse {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor shape disagreement; message names the offending shapes.
struct ShapeError : Error {
  using Error::Error;
};

// Malformed caller-supplied data (empty sentence, id out of range, ...).
struct InputError : Error {
  using Error::Error;
};

// Invalid configuration (alpha out of range, missing teacher logits, ...).
struct ConfigError : Error {
  using Error::Error;
};

// File-level failures: missing files, bad magic, checksum mismatch.
struct IoError : Error {
  using Error::Error;
};

}  // namespace dse
