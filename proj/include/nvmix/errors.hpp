#pragma once

// Exception taxonomy for the nvmix library. Every failure mode that callers
// are expected to branch on gets its own type; all derive from nvmix::Error.

#include <stdexcept>
#include <string>

namespace nvmix {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Sensitivity coefficients diverge near the ground-state level crossing.
struct DegenerateBranch : Error {
  using Error::Error;
};

// Difference-band schedule requested while the signal is already resonant.
struct DegenerateMixing : Error {
  using Error::Error;
};

// Sideband (phase-modulation) expansion requires delta_s/omega_phi < 1.
struct SidebandExpansionInvalid : Error {
  using Error::Error;
};

// Small-argument inversion of the first sideband breaks down.
struct SidebandInversionInvalid : Error {
  using Error::Error;
};

// Resolving the fastest carrier would exceed the integrator step budget.
struct StepSizeTooCoarse : Error {
  using Error::Error;
};

// Integrator produced a non-physical state (population outside [0,1] or NaN).
struct SolverDiverged : Error {
  using Error::Error;
};

struct FitDidNotConverge : Error {
  using Error::Error;
};

// Record carries no decay information (e.g. all counts equal).
struct DegenerateData : Error {
  using Error::Error;
};

struct ConfigInvalid : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Malformed tabular input; message carries line number and column name.
struct SchemaError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

}  // namespace nvmix
