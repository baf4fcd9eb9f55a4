#pragma once

#include <stdexcept>
#include <string>

namespace l3inv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// level3_model
class NonConvergence : public Error { public: using Error::Error; };

// dataset_gen
class InvalidRange : public Error { public: using Error::Error; };
class GenerationFailure : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class SchemaMismatch : public Error { public: using Error::Error; };
class CorruptData : public Error { public: using Error::Error; };

// neuralnet
class InvalidConfig : public Error { public: using Error::Error; };
class ShapeMismatch : public Error { public: using Error::Error; };
class DegenerateTarget : public Error { public: using Error::Error; };

// trainer
class DataModelMismatch : public Error { public: using Error::Error; };
class NumericalFailure : public Error { public: using Error::Error; };
class UnknownSplit : public Error { public: using Error::Error; };

}  // namespace l3inv
