#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graspcap {

/// Broad failure classes. The CLI maps each one onto a process exit code.
enum class ErrorClass {
  Usage,      // precondition violated by the caller
  Input,      // data present but rejected (malformed, no marker, schema)
  Io,         // file could not be read or written
  Numerical,  // algorithm could not produce a valid answer
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string code, const std::string& what)
      : std::runtime_error(what), class_(cls), code_(std::move(code)) {}

  ErrorClass error_class() const noexcept { return class_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorClass class_;
  std::string code_;
};

#define GRASPCAP_DEFINE_ERROR(Name, Class)                                   \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what)                                   \
        : Error(ErrorClass::Class, #Name, what) {}                           \
  };

GRASPCAP_DEFINE_ERROR(PreconditionViolation, Usage)
GRASPCAP_DEFINE_ERROR(IoFailure, Io)

// timebase
GRASPCAP_DEFINE_ERROR(TooShort, Input)
GRASPCAP_DEFINE_ERROR(NyquistViolation, Usage)
GRASPCAP_DEFINE_ERROR(NoBeepFound, Input)
GRASPCAP_DEFINE_ERROR(SameClock, Usage)
GRASPCAP_DEFINE_ERROR(UnsupportedWav, Input)

// annotations
GRASPCAP_DEFINE_ERROR(NegativeMappedTime, Input)
GRASPCAP_DEFINE_ERROR(NegativeTime, Usage)

// rgbd
GRASPCAP_DEFINE_ERROR(DimensionMismatch, Input)
GRASPCAP_DEFINE_ERROR(UnsupportedPlyProfile, Input)
GRASPCAP_DEFINE_ERROR(UnsupportedImage, Input)

// align
GRASPCAP_DEFINE_ERROR(DegenerateConfiguration, Numerical)
GRASPCAP_DEFINE_ERROR(LengthMismatch, Usage)
GRASPCAP_DEFINE_ERROR(EmptyCloud, Input)
GRASPCAP_DEFINE_ERROR(AllPairsRejected, Numerical)
GRASPCAP_DEFINE_ERROR(EmptyAfterCrop, Input)
GRASPCAP_DEFINE_ERROR(EmptyPartition, Numerical)

// kinematics
GRASPCAP_DEFINE_ERROR(JointLimitViolation, Usage)
GRASPCAP_DEFINE_ERROR(OpenMesh, Input)
GRASPCAP_DEFINE_ERROR(InvalidChain, Input)

// grasps
GRASPCAP_DEFINE_ERROR(MixedContext, Usage)
GRASPCAP_DEFINE_ERROR(Unresolvable, Numerical)
GRASPCAP_DEFINE_ERROR(Tie, Numerical)
GRASPCAP_DEFINE_ERROR(GroupTooSmall, Usage)

// session
GRASPCAP_DEFINE_ERROR(SchemaViolation, Input)
GRASPCAP_DEFINE_ERROR(DanglingReference, Input)

#undef GRASPCAP_DEFINE_ERROR

/// Parse failure tied to a 1-based line of a text document.
class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line, const std::string& reason)
      : Error(ErrorClass::Input, "MalformedLine",
              "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw PreconditionViolation(what);
}

}  // namespace graspcap
