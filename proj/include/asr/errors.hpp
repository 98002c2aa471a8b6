#pragma once

#include <stdexcept>
#include <string>

namespace asr {

/// Shape/dimension violations (zero dims, matmul mismatch, ...).
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Math domain violations (log of non-positive input, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// API contract violations (non-scalar loss, negative attention weights, ...).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid model/experiment configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Label sequence cannot be aligned within the given number of frames.
struct CtcInfeasibleError : std::runtime_error {
    explicit CtcInfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input has fewer frames than the convolution window.
struct UtteranceTooShortError : std::runtime_error {
    explicit UtteranceTooShortError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A brute-force oracle refused an instance that is too large to enumerate.
struct OracleRefusedError : std::runtime_error {
    explicit OracleRefusedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unreadable, truncated or wrong-format checkpoint file.
struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Base/target architectures disagree on a shared parameter.
struct IncompatibleCheckpointError : std::runtime_error {
    explicit IncompatibleCheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training aborted (NaN loss/gradient, empty feasible set, ...).
struct TrainAbortError : std::runtime_error {
    explicit TrainAbortError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File-system / serialization problems outside checkpoints.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unsupported audio container or sample format.
struct AudioFormatError : std::runtime_error {
    explicit AudioFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace asr
