#pragma once

#include <stdexcept>
#include <string>

namespace ddlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape disagreement between operands (matmul, cosine, batch width, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An argument value outside its documented domain (p not in [0,1],
/// empty vector, all-zero cosine operand, ...).
class ValueError : public Error {
public:
    using Error::Error;
};

/// Unreadable or inconsistent external data (files, headers, hashes).
class DataError : public Error {
public:
    using Error::Error;
};

/// IDX file problems, distinguishable by kind.
class IdxError : public DataError {
public:
    enum class Kind { bad_magic, truncated, count_mismatch };

    IdxError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Training produced a non-finite loss; the loop aborts rather than
/// continue with poisoned weights.
class TrainingDiverged : public Error {
public:
    using Error::Error;
};

/// Bad experiment configuration (unknown keys, malformed JSON, invalid grids).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ddlab
