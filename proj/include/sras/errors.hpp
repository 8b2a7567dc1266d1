#ifndef SRAS_ERRORS_HPP_
#define SRAS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sras {

// All library failures derive from Error so callers (the CLI in particular)
// can turn them into a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape error: " + what) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what)
      : Error("argument error: " + what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error("format error: " + what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error("data error: " + what) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what)
      : Error("training error: " + what) {}
};

class RewardError : public Error {
 public:
  RewardError(const std::string& example_id, const std::string& what)
      : Error("reward error [" + example_id + "]: " + what),
        example_id_(example_id) {}

  const std::string& example_id() const noexcept { return example_id_; }

 private:
  std::string example_id_;
};

}  // namespace sras

#endif  // SRAS_ERRORS_HPP_
