#ifndef POSTCAP_ERRORS_HPP
#define POSTCAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace postcap {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Matrix fails the Hermiticity tolerance.
struct NotHermitian : Error {
  explicit NotHermitian(const std::string& msg) : Error(msg) {}
};

// Matrix has an eigenvalue below the PSD tolerance.
struct NotPsd : Error {
  explicit NotPsd(const std::string& msg) : Error(msg) {}
};

// Operands have incompatible shapes or subsystem dimensions.
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

// Postselection error parameter outside (0, 1).
struct EpsOutOfRange : Error {
  explicit EpsOutOfRange(const std::string& msg) : Error(msg) {}
};

// Builtin factory got a name it does not know.
struct UnknownName : Error {
  explicit UnknownName(const std::string& msg) : Error(msg) {}
};

// Builtin factory parameter outside its admissible interval.
struct ParamOutOfRange : Error {
  explicit ParamOutOfRange(const std::string& msg) : Error(msg) {}
};

// Interior-point engine failed to reach the requested accuracy.
struct SolverFailure : Error {
  explicit SolverFailure(const std::string& msg) : Error(msg) {}
};

// A feasibility program has no solution within tolerance.
struct FeasibilityFailure : Error {
  explicit FeasibilityFailure(const std::string& msg) : Error(msg) {}
};

// Requested message dimension exceeds the one-shot converse bound.
struct InfeasibleRate : Error {
  explicit InfeasibleRate(const std::string& msg) : Error(msg) {}
};

// Scalar interval for the achiever construction is empty beyond tolerance.
struct EmptyScalingInterval : Error {
  explicit EmptyScalingInterval(const std::string& msg) : Error(msg) {}
};

// Conclusive probability vanished for some message.
struct AllInconclusive : Error {
  explicit AllInconclusive(const std::string& msg) : Error(msg) {}
};

// Supermap is signalling in a direction that must be nonsignalling.
struct NotNonsignalling : Error {
  explicit NotNonsignalling(const std::string& msg) : Error(msg) {}
};

// Supermap normalization produced an inadmissible object.
struct AdmissibilityFailure : Error {
  explicit AdmissibilityFailure(const std::string& msg) : Error(msg) {}
};

// Iterative search exhausted its budget without converging.
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& msg) : Error(msg) {}
};

}  // namespace postcap

#endif  // POSTCAP_ERRORS_HPP
