// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace objectadd {

enum class ErrorKind {
    Config,            // invalid configuration, geometry or request
    Parse,             // malformed input file
    Resolution,        // mask resampling in the wrong direction
    Shape,             // operand shapes disagree
    Overflow,          // token window exceeded
    DegenerateAttention,
    GuidanceDiverged,
    TrajectoryAlignment,
    Capability,        // backend lacks a declared capability
    Backend,           // backend failure during a step
    Segmentation,      // real-object segmentation produced nothing
    Io,
    Contract,          // precondition violated by the caller
};

const char* to_string(ErrorKind kind);

/// Base error for the whole library. `stage` names the pipeline stage that
/// failed (empty outside the pipeline).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string stage = {})
        : std::runtime_error(message), kind_(kind), stage_(std::move(stage)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& stage() const noexcept { return stage_; }

    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    ErrorKind kind_;
    std::string stage_;
};

/// Raised by the guidance loop when a gradient turns non-finite; carries the
/// energies recorded so far.
class GuidanceDivergedError : public Error {
public:
    GuidanceDivergedError(const std::string& message, std::vector<double> history)
        : Error(ErrorKind::GuidanceDiverged, message), history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Parse failures carry the 1-based line number they refer to.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& message)
        : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace objectadd
