#pragma once

#include <stdexcept>
#include <string>

namespace atomchip {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// chip_model
struct PointOnWire : Error { using Error::Error; };
struct NoTrapFound : Error { using Error::Error; };
struct PolesInDomain : Error { using Error::Error; };
struct IllConditioned : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };

// sta_design
struct OutOfDomain : Error { using Error::Error; };
struct NegativeDiscriminant : Error { using Error::Error; };
struct RootJump : Error { using Error::Error; };

// classical_sim
struct StepTooLarge : Error { using Error::Error; };
struct PerturbationTooLarge : Error { using Error::Error; };

// scaling_sim
struct NonPositiveFrequency : Error { using Error::Error; };
struct CollapseDetected : Error { using Error::Error; };

// gpe_sim
struct NotConverged : Error { using Error::Error; };
struct GridOverflow : Error { using Error::Error; };

// mode_analysis
struct SeriesTooShort : Error { using Error::Error; };

// sequence
struct NoOscillation : Error { using Error::Error; };

// cli / config
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };

} // namespace atomchip
