#ifndef EEGVAE_ERRORS_HPP
#define EEGVAE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eegvae {

// Exit-code families used by the CLI: 1 usage, 2 data, 3 runtime/numeric.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : UsageError {
    using UsageError::UsageError;
};

struct ParseError : DataError {
    using DataError::DataError;
};
struct TruncationError : DataError {
    using DataError::DataError;
};
struct AnnotationError : DataError {
    using DataError::DataError;
};
struct MissingRunError : DataError {
    using DataError::DataError;
};
struct WindowError : DataError {
    using DataError::DataError;
};
struct SplitError : DataError {
    using DataError::DataError;
};
struct FitError : DataError {
    using DataError::DataError;
};
struct CacheVersionError : DataError {
    using DataError::DataError;
};
struct StateError : DataError {
    using DataError::DataError;
};
struct SubjectIndexError : DataError {
    using DataError::DataError;
};

struct ShapeError : NumericError {
    using NumericError::NumericError;
};
struct DomainError : NumericError {
    using NumericError::NumericError;
};
struct VariantError : NumericError {
    using NumericError::NumericError;
};

} // namespace eegvae

#endif // EEGVAE_ERRORS_HPP
