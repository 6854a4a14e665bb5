#pragma once

#include <stdexcept>
#include <string>

namespace gmia {

/// Bad arguments or configuration rejected before any computation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or missing input files. The message carries file and line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, double loss)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                           " (loss " + std::to_string(loss) + ")"),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace gmia
