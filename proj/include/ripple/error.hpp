#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ripple {

/// Base for every domain failure raised by the toolkit. The CLI maps these to
/// exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::uint64_t byte_offset)
        : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::uint64_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::uint64_t byte_offset_;
};

class SchemaError : public Error {
public:
    SchemaError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateError : public Error {
public:
    explicit DuplicateError(const std::string& key, const std::string& field = "id")
        : Error("duplicate " + field + ": " + key), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& name)
        : Error("not found: " + name), name_(name) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class MissingConceptError : public Error {
public:
    explicit MissingConceptError(const std::string& concept_name)
        : Error("concept missing from utility table: " + concept_name) {}
};

class EmptyCorpusError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class TransportError : public Error { using Error::Error; };
class ExtractionError : public Error { using Error::Error; };
class EmptyFactsError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class IntegrityError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class RunFailedError : public Error { using Error::Error; };

}  // namespace ripple
