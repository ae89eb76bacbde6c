#pragma once

#include <stdexcept>
#include <string>

namespace qkd {

/// Base of every error raised by the library.
class QkdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Peer violated the message sequence, or the two parties disagree on shared state.
class ProtocolError : public QkdError {
public:
    using QkdError::QkdError;
};

/// A classical frame could not be parsed (truncated, oversized, unknown tag).
class FramingError : public QkdError {
public:
    using QkdError::QkdError;
};

/// The transport is closed, or the peer could not be reached.
class ConnectionError : public QkdError {
public:
    using QkdError::QkdError;
};

/// Final verification after parity reconciliation found the keys still differ.
class ReconciliationError : public QkdError {
public:
    using QkdError::QkdError;
};

/// Invalid argument to a post-processing primitive (e.g. Toeplitz seed length).
class ParameterError : public QkdError {
public:
    using QkdError::QkdError;
};

/// SessionConfig failed validation.
class ConfigError : public QkdError {
public:
    using QkdError::QkdError;
};

/// One-time pad ran out of unused key bits.
class KeyExhausted : public QkdError {
public:
    using QkdError::QkdError;
};

/// Ciphertext offset does not match the local ledger position.
class DesyncError : public QkdError {
public:
    using QkdError::QkdError;
};

}  // namespace qkd
