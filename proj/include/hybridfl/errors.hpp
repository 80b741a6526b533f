#pragma once

#include <stdexcept>
#include <string>

namespace hybridfl {

// Every failure raised by the library derives from Error so callers can
// catch the whole family in one place (the CLI maps them to exit codes).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HYBRIDFL_DEFINE_ERROR(Name)        \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

HYBRIDFL_DEFINE_ERROR(ShapeError);
HYBRIDFL_DEFINE_ERROR(NumericError);
HYBRIDFL_DEFINE_ERROR(ConfigError);
HYBRIDFL_DEFINE_ERROR(IntegrityError);
HYBRIDFL_DEFINE_ERROR(SchemaError);
HYBRIDFL_DEFINE_ERROR(ParseError);
HYBRIDFL_DEFINE_ERROR(StratificationError);
HYBRIDFL_DEFINE_ERROR(ProtocolError);
HYBRIDFL_DEFINE_ERROR(OwnershipError);
HYBRIDFL_DEFINE_ERROR(DataError);
HYBRIDFL_DEFINE_ERROR(UsageError);
HYBRIDFL_DEFINE_ERROR(UndefinedMetricError);

#undef HYBRIDFL_DEFINE_ERROR

// Missing or lost message at a protocol barrier.
class ProtocolTimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// Wraps a failure inside the training loop with round/batch context.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int round, int batch)
      : Error("round " + std::to_string(round) + ", batch " +
              std::to_string(batch) + ": " + what),
        round_(round),
        batch_(batch) {}

  int round() const { return round_; }
  int batch() const { return batch_; }

 private:
  int round_;
  int batch_;
};

}  // namespace hybridfl
