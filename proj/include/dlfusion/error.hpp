#pragma once

#include <stdexcept>
#include <string>

namespace dlfusion {

/// Broad error category, used by the CLI to pick an exit code.
enum class ErrorClass {
  Input,    // malformed or invalid user input (exit 2)
  Runtime,  // anything else (exit 3)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define DLFUSION_DECLARE_ERROR(Name, Class)                              \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(Class, what) {}      \
  }

// Input-class errors.
DLFUSION_DECLARE_ERROR(SchemaError, ErrorClass::Input);
DLFUSION_DECLARE_ERROR(ValidationError, ErrorClass::Input);
DLFUSION_DECLARE_ERROR(EmptyNetworkError, ErrorClass::Input);
DLFUSION_DECLARE_ERROR(InputFileError, ErrorClass::Input);
DLFUSION_DECLARE_ERROR(CoverageError, ErrorClass::Input);
DLFUSION_DECLARE_ERROR(InvalidStrategyError, ErrorClass::Input);
DLFUSION_DECLARE_ERROR(InvalidMpError, ErrorClass::Input);
DLFUSION_DECLARE_ERROR(NoComputeLayerError, ErrorClass::Input);

// Runtime-class errors.
DLFUSION_DECLARE_ERROR(OverflowError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(NotComputeLayerError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(DomainError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(UnsupportedStrideError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(DegenerateDataError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(InsufficientDataError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(SpaceTooLargeError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(TemplateError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(IoError, ErrorClass::Runtime);
DLFUSION_DECLARE_ERROR(ExistsError, ErrorClass::Runtime);

#undef DLFUSION_DECLARE_ERROR

}  // namespace dlfusion
