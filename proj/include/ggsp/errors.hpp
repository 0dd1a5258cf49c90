#ifndef GGSP_ERRORS_HPP
#define GGSP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ggsp {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Graph construction
struct IndexOutOfRange : Error { using Error::Error; };
struct DuplicateEdge : Error { using Error::Error; };
struct NonpositiveWeight : Error { using Error::Error; };
struct SelfLoop : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };
struct ConnectivityTimeout : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };
struct DuplicatePoints : Error { using Error::Error; };
struct ZeroVarianceRow : Error { using Error::Error; };

// Spectral / linear algebra
struct NotSymmetric : Error { using Error::Error; };
struct InvalidSize : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NegativePsd : Error { using Error::Error; };

// Estimation
struct TooFewSamples : Error { using Error::Error; };
struct EmptySampleSet : Error { using Error::Error; };
struct MissingValues : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };
struct EmptyPlan : Error { using Error::Error; };

// Wiener filtering
struct InvalidTruncation : Error { using Error::Error; };
struct PsdStructureViolation : Error { using Error::Error; };
struct SingularObservationGram : Error { using Error::Error; };

// Experiments / IO
struct ParseError : Error { using Error::Error; };
struct InconsistentDimensions : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ZeroSignal : Error { using Error::Error; };

} // namespace ggsp

#endif // GGSP_ERRORS_HPP
