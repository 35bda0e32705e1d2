#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace raimi {

// Base class for all library errors. kind() is a stable machine-readable tag;
// the CLI mirrors it into error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct PrecisionExhausted : Error {
  explicit PrecisionExhausted(const std::string& what)
      : Error("PrecisionExhausted", what) {}
};

struct ExhaustiveLimitExceeded : Error {
  explicit ExhaustiveLimitExceeded(const std::string& what)
      : Error("ExhaustiveLimitExceeded", what) {}
};

struct NoDenseInterval : Error {
  explicit NoDenseInterval(const std::string& what)
      : Error("NoDenseInterval", what) {}
};

struct SearchExhausted : Error {
  explicit SearchExhausted(const std::string& what)
      : Error("SearchExhausted", what) {}
};

struct CertificateFailed : Error {
  explicit CertificateFailed(const std::string& what)
      : Error("CertificateFailed", what) {}
};

struct TooSmallN : Error {
  uint64_t n0;
  explicit TooSmallN(uint64_t n0_)
      : Error("TooSmallN",
              "carrier too small; minimal admissible size is " + std::to_string(n0_)),
        n0(n0_) {}
};

struct InternalInvariantBroken : Error {
  explicit InternalInvariantBroken(const std::string& what)
      : Error("InternalInvariantBroken", what) {}
};

struct UnsupportedField : Error {
  explicit UnsupportedField(const std::string& what)
      : Error("UnsupportedField", what) {}
};

struct ZeroSecondCoordinate : Error {
  explicit ZeroSecondCoordinate(const std::string& what)
      : Error("ZeroSecondCoordinate", what) {}
};

struct PruningAssumptionFailed : Error {
  explicit PruningAssumptionFailed(const std::string& what)
      : Error("PruningAssumptionFailed", what) {}
};

struct NoDirectionFound : Error {
  explicit NoDirectionFound(const std::string& what)
      : Error("NoDirectionFound", what) {}
};

struct OracleLimitExceeded : Error {
  explicit OracleLimitExceeded(const std::string& what)
      : Error("OracleLimitExceeded", what) {}
};

struct PreconditionViolated : Error {
  explicit PreconditionViolated(const std::string& what)
      : Error("PreconditionViolated", what) {}
};

}  // namespace raimi
