#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdepth {

// Two families: content/contract violations (ValidationError) and failures
// to touch the filesystem (IoError). The CLI maps them to exit codes 1 and 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---- reps_io ----

class BadMagic : public ValidationError {
 public:
  BadMagic(const std::string& path, const std::string& expected)
      : ValidationError(path + ": bad magic, expected '" + expected + "'") {}
};

class TruncatedFile : public ValidationError {
 public:
  TruncatedFile(const std::string& path, std::size_t required, std::size_t found)
      : ValidationError(path + ": truncated file, payload needs " + std::to_string(required) +
                        " bytes but " + std::to_string(found) + " present"),
        required_(required),
        found_(found) {}
  std::size_t required() const { return required_; }
  std::size_t found() const { return found_; }

 private:
  std::size_t required_;
  std::size_t found_;
};

class NonFiniteValue : public ValidationError {
 public:
  explicit NonFiniteValue(std::size_t index, const std::string& where = {})
      : ValidationError((where.empty() ? std::string() : where + ": ") +
                        "non-finite value at flat index " + std::to_string(index)),
        index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class InvalidLabel : public ValidationError {
 public:
  InvalidLabel(std::size_t index, unsigned value)
      : ValidationError("invalid label byte " + std::to_string(value) + " at index " +
                        std::to_string(index)),
        index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class MissingLayer : public ValidationError {
 public:
  explicit MissingLayer(std::size_t layer)
      : ValidationError("missing layer file for layer " + std::to_string(layer)), layer_(layer) {}
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ManifestError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// ---- probe ----

class SingleClassTraining : public ValidationError {
 public:
  SingleClassTraining() : ValidationError("training labels contain a single class") {}
};

class NonFiniteEncountered : public Error {
 public:
  using Error::Error;
};

// ---- metrics ----

class LengthMismatch : public ValidationError {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : ValidationError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class EmptyInput : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SingleClass : public ValidationError {
 public:
  SingleClass() : ValidationError("AUC needs both classes present") {}
};

class ZeroAccuracy : public ValidationError {
 public:
  explicit ZeroAccuracy(std::size_t layer)
      : ValidationError("accuracy at layer " + std::to_string(layer) +
                        " is not positive; variation rate undefined"),
        layer_(layer) {}
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

// ---- datasets ----

class UnknownDataset : public ValidationError {
 public:
  explicit UnknownDataset(const std::string& name)
      : ValidationError("unknown dataset '" + name + "'") {}
};

class EmptyGroup : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// ---- pipeline ----

class PartialFailure : public Error {
 public:
  PartialFailure(std::size_t layer, const std::string& cause, bool io)
      : Error("layer " + std::to_string(layer) + " failed: " + cause), layer_(layer), io_(io) {}
  std::size_t layer() const { return layer_; }
  // True when the underlying cause was an IoError.
  bool io() const { return io_; }

 private:
  std::size_t layer_;
  bool io_;
};

}  // namespace cdepth
