#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bolt {

enum class ErrorCode {
  // registry_model
  InvalidDate,
  StartAfterEnd,
  SelfCoMember,
  // ingest
  MissingColumn,
  UnexpectedColumn,
  TypeMismatch,
  DateParseError,
  TooManyRejects,
  DuplicateRecord,
  DuplicateSourceName,
  UnknownSource,
  SchemaError,
  // recipe
  SyntaxError,
  UnknownKey,
  InvalidValue,
  UnknownDictionary,
  UnknownRecipe,
  UnknownField,
  UnboundedRecursion,
  // extract
  UnsortedInput,
  // render
  MissingSlotValue,
  UnmappedCode,
  TemplateError,
  BudgetUnsatisfiable,
  // cli / io
  IoError,
  UnknownPerson,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure in the library is reported as a bolt::Error. `line` and
/// `column` are 1-based and zero when not applicable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0, std::size_t column = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  ErrorCode code_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace bolt
