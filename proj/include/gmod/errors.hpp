#pragma once

#include <stdexcept>
#include <string>

namespace gmod {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// graph
class CycleError : public Error {
 public:
  using Error::Error;
};
class EmptyGraphError : public Error {
 public:
  using Error::Error;
};
class SizeLimitError : public Error {
 public:
  using Error::Error;
};
class NodeNotFoundError : public Error {
 public:
  using Error::Error;
};
class DuplicateEdgeError : public Error {
 public:
  using Error::Error;
};
class GraphError : public Error {
 public:
  using Error::Error;
};

// datagen
class TooSmallError : public Error {
 public:
  using Error::Error;
};
class NoSimilarLabelError : public Error {
 public:
  using Error::Error;
};
class InsufficientGraphsError : public Error {
 public:
  using Error::Error;
};
class EmptySetError : public Error {
 public:
  using Error::Error;
};

// tensor engine
class ShapeError : public Error {
 public:
  using Error::Error;
};
class AllMaskedRowError : public Error {
 public:
  using Error::Error;
};
class NonScalarLossError : public Error {
 public:
  using Error::Error;
};

// model / training
class DecodeOverflowError : public Error {
 public:
  using Error::Error;
};
class DivergenceError : public Error {
 public:
  using Error::Error;
};
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// eval
class LengthMismatchError : public Error {
 public:
  using Error::Error;
};
class VocabMismatchError : public Error {
 public:
  using Error::Error;
};

// io / cli
class IoError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmod
