#pragma once

#include <stdexcept>
#include <string>

namespace tsym {

/* Everything thrown on purpose derives from Error.  The subclass decides the
 * CLI exit code: InputError and its children map to exit 2, InternalError to
 * exit 3.  Verification *verdicts* (a check that ran and said "no") are
 * ordinary return values, never exceptions. */
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* Bad user input: malformed expressions, dimension mismatches, operations
 * requested outside their stated preconditions. */
struct InputError : Error {
  using Error::Error;
};

/* A name that was never declared (or never interned) was referenced. */
struct UndeclaredSymbolError : InputError {
  using InputError::InputError;
};

/* A total derivative or prolongation stepped past the jet order the
 * surrounding context can represent. */
struct TruncationError : InputError {
  using InputError::InputError;
};

/* The randomized evaluation oracle could not find enough regular sample
 * points inside its box. */
struct SingularRegionError : InputError {
  using InputError::InputError;
};

/* An operation was asked to run under a twist it does not support. */
struct EligibilityError : InputError {
  using InputError::InputError;
};

/* A consistency check that should hold by construction failed; this always
 * indicates a bug, and the CLI reports it as exit 3. */
struct InternalError : Error {
  using Error::Error;
};

}  // namespace tsym
