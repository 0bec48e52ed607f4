#pragma once

#include <stdexcept>
#include <string>

namespace sandlab {

// Error hierarchy shared by all modules. Operations throw; nothing is
// reported through sentinel return values.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A read or scan left the stored window and the tail gives no answer.
struct InsufficientWindow : Error {
    explicit InsufficientWindow(const std::string& msg) : Error(msg) {}
};

// Coupled operation on a pair that is not pointwise ordered.
struct NotOrdered : Error {
    explicit NotOrdered(const std::string& msg) : Error(msg) {}
};

// Site outside the legal range for the operation.
struct InvalidSite : Error {
    explicit InvalidSite(const std::string& msg) : Error(msg) {}
};

// Grain field violating the stabilizer precondition (entry < 1 in volume).
struct InvalidGrainField : Error {
    explicit InvalidGrainField(const std::string& msg) : Error(msg) {}
};

// Enumeration request beyond the configured state-space cap.
struct SizeLimit : Error {
    explicit SizeLimit(const std::string& msg) : Error(msg) {}
};

// Iterated-generator evaluation deeper than the configured cap.
struct DepthLimit : Error {
    explicit DepthLimit(const std::string& msg) : Error(msg) {}
};

// Series evaluation requested at or beyond the convergence radius.
struct RadiusExceeded : Error {
    explicit RadiusExceeded(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

}  // namespace sandlab
