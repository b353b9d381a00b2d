#pragma once

#include <stdexcept>
#include <string>

namespace osa {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define OSA_DEFINE_ERROR(Name)                                         \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& what) : Error(what) {}        \
    }

// embedding-core
OSA_DEFINE_ERROR(ZeroVectorError);
OSA_DEFINE_ERROR(BadMagicError);
OSA_DEFINE_ERROR(UnsupportedVersionError);
OSA_DEFINE_ERROR(TruncatedFileError);
OSA_DEFINE_ERROR(ShapeOverflowError);

// debias / noise-lab
OSA_DEFINE_ERROR(TooFewPairsError);
OSA_DEFINE_ERROR(SubsetTooSmallError);
OSA_DEFINE_ERROR(MissingLabelsError);

// theory-sim / shared parameter validation
OSA_DEFINE_ERROR(BadParamsError);
OSA_DEFINE_ERROR(ShapeMismatchError);

// gmm
OSA_DEFINE_ERROR(InvalidThresholdError);

// trainer
OSA_DEFINE_ERROR(ConfigInvalidError);
OSA_DEFINE_ERROR(EmptyTestSetError);

#undef OSA_DEFINE_ERROR

}  // namespace osa
