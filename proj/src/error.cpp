#include "bolt/error.hpp"

namespace bolt {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDate: return "InvalidDate";
    case ErrorCode::StartAfterEnd: return "StartAfterEnd";
    case ErrorCode::SelfCoMember: return "SelfCoMember";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnexpectedColumn: return "UnexpectedColumn";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::DateParseError: return "DateParseError";
    case ErrorCode::TooManyRejects: return "TooManyRejects";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::DuplicateSourceName: return "DuplicateSourceName";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::UnknownDictionary: return "UnknownDictionary";
    case ErrorCode::UnknownRecipe: return "UnknownRecipe";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::UnboundedRecursion: return "UnboundedRecursion";
    case ErrorCode::UnsortedInput: return "UnsortedInput";
    case ErrorCode::MissingSlotValue: return "MissingSlotValue";
    case ErrorCode::UnmappedCode: return "UnmappedCode";
    case ErrorCode::TemplateError: return "TemplateError";
    case ErrorCode::BudgetUnsatisfiable: return "BudgetUnsatisfiable";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownPerson: return "UnknownPerson";
  }
  return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message, std::size_t line, std::size_t column) {
  std::string out = to_string(code);
  if (line != 0) {
    out += " at line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
  }
  out += ": ";
  out += message;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(decorate(code, message, line, column)), code_(code), line_(line), column_(column) {}

}  // namespace bolt
