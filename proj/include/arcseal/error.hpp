#pragma once

#include <stdexcept>
#include <string>

namespace arcseal {

enum class ErrorCode {
  // container / serialization
  BadMagic,
  TruncatedPayload,
  UnsupportedVersion,
  ParseError,
  IoError,
  // media
  WindowOutOfRange,
  MediaInvalid,
  // features / math
  DimensionMismatch,
  ShapeMismatch,
  ZeroVector,
  EmptyInput,
  // training
  InsufficientData,
  EmptyPositives,
  // pipeline / verification
  RecordTooLarge,
  ModelHashMismatch,
  BlockCountMismatch,
  MissingRecord,
  // ledger / node
  NotInTurn,
  DuplicateUid,
  BadParent,
  BadSeal,
  UnauthorizedSealer,
  BadRoot,
  Oversize,
  DisjointGenesis,
  NotFound,
  Unauthorized,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace arcseal
