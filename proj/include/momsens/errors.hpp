#pragma once

#include <stdexcept>
#include <string>

namespace momsens {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Construction of (G, S, W) violated a dimension, symmetry, rank or
// definiteness requirement.
struct InvalidIngredients : Error {
  using Error::Error;
};

// G'WG is numerically singular: identification is lost.
struct SingularBread : Error {
  using Error::Error;
};

// S cannot be inverted, so optimal weighting is unavailable.
struct SingularS : Error {
  using Error::Error;
};

// Moment-dropping measures need J > P.
struct NotOveridentified : Error {
  using Error::Error;
};

// A moment has zero sample (or bootstrap) variance.
struct DegenerateMoment : Error {
  using Error::Error;
};

// A moment evaluation produced NaN/Inf or an underflowed hazard.
struct NonFinite : Error {
  using Error::Error;
};

// The minimizer could not improve on the starting point.
struct NoImprovement : Error {
  using Error::Error;
};

// The taste-shock covariance is not positive definite.
struct OmegaNotPd : Error {
  using Error::Error;
};

// Table comparison received incompatible shapes or labels.
struct ShapeMismatch : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace momsens
