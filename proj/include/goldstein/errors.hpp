#pragma once

#include <stdexcept>
#include <string>

namespace goldstein {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedInput : public Error { using Error::Error; };
class DegreeOverflow : public Error { using Error::Error; };
class InvalidProfile : public Error { using Error::Error; };
class AlgebraFailure : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class TooFewNodes : public Error { using Error::Error; };
class ExtrapolationError : public Error { using Error::Error; };
class SingularInput : public Error { using Error::Error; };
class InvalidInitialData : public Error { using Error::Error; };
class InvalidState : public Error { using Error::Error; };
class StepFailure : public Error { using Error::Error; };
class InconsistentLambda : public Error { using Error::Error; };
class FitFailure : public Error { using Error::Error; };
class PrecisionError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class MissingInput : public Error { using Error::Error; };

}  // namespace goldstein
