#pragma once

#include <stdexcept>
#include <string>

namespace dafr {

/// Base for every error raised by the library. `code()` is a short stable
/// identifier (e.g. "segment_too_small") that the CLI prints before the
/// human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Input validation failures: unreadable files, missing columns, bad cells.
class DataError : public Error {
public:
    using Error::Error;
};

/// Failures inside the numerical pipeline (rank deficiency, small segments,
/// undefined metrics, dimension mismatches).
class PipelineError : public Error {
public:
    using Error::Error;
};

}  // namespace dafr
