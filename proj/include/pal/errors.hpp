#pragma once

#include <stdexcept>
#include <string>

namespace pal {

/// Base for every error the harness raises on purpose. Setup/config errors
/// abort a run; per-item errors are captured in traces instead of thrown.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// prompt assembly
struct StyleMismatch : Error { using Error::Error; };
struct EmptyTestQuestion : Error { using Error::Error; };
struct MissingDecomposition : Error { using Error::Error; };
struct ParseFailure : Error { using Error::Error; };

// backends
struct BackendUnavailable : Error { using Error::Error; };
struct ReplayMiss : Error { using Error::Error; };
struct CredentialMissing : Error { using Error::Error; };
struct ArchiveWriteFailure : Error { using Error::Error; };

// program extraction
struct EmptyProgram : Error { using Error::Error; };

// scoring
struct EmptyInput : Error { using Error::Error; };

// datasets / forge
struct FormatError : Error { using Error::Error; };
struct NoNumberFound : Error { using Error::Error; };
struct TrustGateFailure : Error { using Error::Error; };
struct AmbiguousLiteral : Error { using Error::Error; };
struct ExecutionFailure : Error { using Error::Error; };

// orchestrator
struct MissingTraces : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace pal
