#pragma once

#include <stdexcept>
#include <string>

namespace omtree {

enum class ErrorCode {
  InvalidArgument,
  InvalidInterval,
  UndefinedRate,
  CounterInconsistency,
  ProbeInconsistency,
  InvalidPath,
  DisconnectedGraph,
  InvalidTask,
  InvalidAction,
  InvalidTree,
  CountMismatch,
  ShapeMismatch,
  NonFinite,
  BudgetExceeded,
  NotReady,
  Io,
  VersionMismatch,
  Checksum,
  Parse,
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

}  // namespace omtree
