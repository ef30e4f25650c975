#pragma once

#include <stdexcept>
#include <string>

namespace mlh {

/// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mesh parsing.
class MalformedHeader : public Error {
 public:
  using Error::Error;
};
class TruncatedFile : public Error {
 public:
  using Error::Error;
};
class MalformedRecord : public Error {
 public:
  using Error::Error;
};
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};
class InvalidParams : public Error {
 public:
  using Error::Error;
};
class ParseError : public Error {
 public:
  using Error::Error;
};

// Geometry / descriptors.
class ZeroAreaMesh : public Error {
 public:
  using Error::Error;
};
class EmptyCloud : public Error {
 public:
  using Error::Error;
};
class EmptyList : public Error {
 public:
  using Error::Error;
};
class LayerOutOfRange : public Error {
 public:
  using Error::Error;
};
class PointOutOfRange : public Error {
 public:
  using Error::Error;
};
class ResolutionMismatch : public Error {
 public:
  using Error::Error;
};

// Tensor / network.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};
class LabelOutOfRange : public Error {
 public:
  using Error::Error;
};
class UnsupportedK : public Error {
 public:
  using Error::Error;
};

// File formats / pipeline.
class BadMagic : public Error {
 public:
  using Error::Error;
};
class VersionUnsupported : public Error {
 public:
  using Error::Error;
};
class LengthMismatch : public Error {
 public:
  using Error::Error;
};
class EmptyClass : public Error {
 public:
  using Error::Error;
};
class ConfigInvalid : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlh
