#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace critmech {

enum class ErrorCode {
    SyntaxError,
    UnknownKeyword,
    UndeclaredSprite,
    DuplicateSprite,
    CyclicParent,
    InvalidDescription,
    UnmappedCharacter,
    RaggedLevel,
    AvatarCount,
    ContractViolation,
    IncompleteTrace,
    TraceGraphMismatch,
    NoWinningTrace,
    NoWinPath,
    NoWinCondition,
    DegenerateTable,
    MissingFixture,
    BadConfig,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a stable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ParseError : public Error {
public:
    ParseError(ErrorCode code, int line, int column, const std::string& message)
        : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::SyntaxError: return "SYNTAX_ERROR";
    case ErrorCode::UnknownKeyword: return "UNKNOWN_KEYWORD";
    case ErrorCode::UndeclaredSprite: return "UNDECLARED_SPRITE";
    case ErrorCode::DuplicateSprite: return "DUPLICATE_SPRITE";
    case ErrorCode::CyclicParent: return "CYCLIC_PARENT";
    case ErrorCode::InvalidDescription: return "INVALID_DESCRIPTION";
    case ErrorCode::UnmappedCharacter: return "UNMAPPED_CHARACTER";
    case ErrorCode::RaggedLevel: return "RAGGED_LEVEL";
    case ErrorCode::AvatarCount: return "AVATAR_COUNT";
    case ErrorCode::ContractViolation: return "CONTRACT_VIOLATION";
    case ErrorCode::IncompleteTrace: return "INCOMPLETE_TRACE";
    case ErrorCode::TraceGraphMismatch: return "TRACE_GRAPH_MISMATCH";
    case ErrorCode::NoWinningTrace: return "NO_WINNING_TRACE";
    case ErrorCode::NoWinPath: return "NO_WIN_PATH";
    case ErrorCode::NoWinCondition: return "NO_WIN_CONDITION";
    case ErrorCode::DegenerateTable: return "DEGENERATE_TABLE";
    case ErrorCode::MissingFixture: return "MISSING_FIXTURE";
    case ErrorCode::BadConfig: return "BAD_CONFIG";
    case ErrorCode::Io: return "IO_ERROR";
    }
    return "UNKNOWN";
}

} // namespace critmech
