#pragma once

#include <stdexcept>
#include <string>

namespace rdr {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Usage,     // bad arguments or configuration
  Data,      // unreadable or malformed input
  Numeric,   // numerically degenerate instance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define RDR_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Kind, what) {}     \
  };

RDR_DEFINE_ERROR(BadShape, ErrorKind::Usage)
RDR_DEFINE_ERROR(InconsistentSystem, ErrorKind::Numeric)
RDR_DEFINE_ERROR(NotSymmetric, ErrorKind::Numeric)
RDR_DEFINE_ERROR(DegenerateMatrix, ErrorKind::Numeric)
RDR_DEFINE_ERROR(ZeroRow, ErrorKind::Numeric)
RDR_DEFINE_ERROR(DegenerateStep, ErrorKind::Numeric)
RDR_DEFINE_ERROR(ParseError, ErrorKind::Data)
RDR_DEFINE_ERROR(UnsupportedField, ErrorKind::Data)
RDR_DEFINE_ERROR(IoError, ErrorKind::Data)

#undef RDR_DEFINE_ERROR

}  // namespace rdr
