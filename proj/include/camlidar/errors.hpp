#pragma once

#include <stdexcept>
#include <string>

namespace camlidar {

// Base class for all library failures that callers are expected to handle.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A point handed to the projection model has camera-frame depth <= epsilon.
struct NonPositiveDepth : Error {
  using Error::Error;
};

// Rendering produced an image with zero valid pixels.
struct EmptyProjection : Error {
  using Error::Error;
};

// Two containers that must agree in shape do not.
struct DimensionMismatch : Error {
  using Error::Error;
};

// Fewer points than the solver's minimal set.
struct TooFewPoints : Error {
  using Error::Error;
};

// Point configuration is degenerate for the solver (collinear, rank-deficient).
struct DegenerateConfiguration : Error {
  using Error::Error;
};

// RANSAC found no hypothesis with enough inliers.
struct NoConsensus : Error {
  using Error::Error;
};

// Relative error reduction is undefined because an initial error is zero.
struct ZeroInitialError : Error {
  using Error::Error;
};

// Binary scan payload is not a whole number of point records, or holds
// non-finite coordinates.
struct MalformedScan : Error {
  using Error::Error;
};

// Text or structured input that fails to parse or violates its documented
// invariants (trajectory ordering, intrinsics fields, ...).
struct MalformedInput : Error {
  using Error::Error;
};

// Per-scan label arrays that do not line up with their scans.
struct LabelLengthMismatch : Error {
  using Error::Error;
};

// Filesystem-level failure: missing file, short read, unwritable target.
struct IoFailure : Error {
  using Error::Error;
};

}  // namespace camlidar
