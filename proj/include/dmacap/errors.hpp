#pragma once

#include <stdexcept>
#include <string>

namespace dmacap
{

  /// Base of every error raised by the simulator.
  class Error : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };

  /// Malformed scenario document.
  class SchemaError : public Error
  {
  public:
    using Error::Error;
  };

  /// Two peripheral ranges intersect.
  class OverlapError : public Error
  {
  public:
    using Error::Error;
  };

  /// A range lies outside the partition it must belong to.
  class PartitionError : public Error
  {
  public:
    using Error::Error;
  };

  /// MPU region size is not a power of two >= 32.
  class SizeError : public Error
  {
  public:
    using Error::Error;
  };

  /// MPU region base is not aligned to its size.
  class AlignmentError : public Error
  {
  public:
    using Error::Error;
  };

  /// A produced MPU configuration or kernel layout is illegal.
  class ConfigError : public Error
  {
  public:
    using Error::Error;
  };

  /// Line fit requested over points that share a single abscissa.
  class DegenerateInput : public Error
  {
  public:
    using Error::Error;
  };

}
