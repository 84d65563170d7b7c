#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rrkit {

/// Base error carrying a stable machine-parsable code alongside the message.
/// Codes: invalid-input, invalid-config, parse, io, transport, protocol, integrity.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& message) : Error("invalid-input", message) {}
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& message) : Error("invalid-config", message) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("parse", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

/// Remote embedding service could not be reached after retries.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& message) : Error("transport", message) {}
};

/// Remote embedding service answered, but the payload violates the protocol.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& message) : Error("protocol", message) {}
};

/// A persisted file failed magic/size/checksum validation.
class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& message) : Error("integrity", message) {}
};

} // namespace rrkit
