#pragma once

#include <stdexcept>
#include <string>

namespace msr {

/// Base of every library error. `kind()` is the stable error name surfaced by
/// the CLI ("RankError", "FormatError", ...).
class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

#define MSR_DEFINE_ERROR(Name)                                            \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(#Name, what) {}        \
  };

MSR_DEFINE_ERROR(InvalidInput)
MSR_DEFINE_ERROR(SingularMatrix)
MSR_DEFINE_ERROR(DegenerateVector)
MSR_DEFINE_ERROR(FormatError)
MSR_DEFINE_ERROR(ShapeMismatch)
MSR_DEFINE_ERROR(IndexError)
MSR_DEFINE_ERROR(RankError)
MSR_DEFINE_ERROR(ProtocolError)
MSR_DEFINE_ERROR(SpecError)

#undef MSR_DEFINE_ERROR

}  // namespace msr
