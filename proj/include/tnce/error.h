#pragma once

#include <stdexcept>
#include <string>

namespace tnce {

// Error taxonomy. One type per failure class so callers (and the CLI exit-code
// mapping) can dispatch without parsing message strings.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor / parameter shape disagreement. Message names both shapes.
struct ShapeError : Error { using Error::Error; };

// NaN/Inf where finite values are required.
struct NumericError : Error { using Error::Error; };

// Invalid configuration value or combination.
struct ConfigError : Error { using Error::Error; };

// Wrong magic / unsupported version in a serialized file.
struct FormatError : Error { using Error::Error; };

// File recognized but internally inconsistent (truncation, bad counts).
struct CorruptionError : Error { using Error::Error; };

// Augmentation policy incompatible with the view it is applied to.
struct PolicyError : Error { using Error::Error; };

// Negative-proposal weights off the probability simplex.
struct ProposalError : Error { using Error::Error; };

// Sample pool too small for the requested negative construction.
struct PoolError : Error { using Error::Error; };

// Missing-modality mask leaves nothing to encode.
struct MaskError : Error { using Error::Error; };

// Argument outside the mathematical domain of an operation.
struct DomainError : Error { using Error::Error; };

// Enumeration / evaluation budget exceeded.
struct BudgetError : Error { using Error::Error; };

// Training run failed (divergence, impossible setting).
struct TrainingError : Error { using Error::Error; };

// Backward pass given a cache from a different forward pass.
struct CacheError : Error { using Error::Error; };

// A function required to be deterministic produced differing values.
struct DeterminismError : Error { using Error::Error; };

// Labels unusable for supervised probing (e.g. single class).
struct DegenerateLabelsError : Error { using Error::Error; };

}  // namespace tnce
