#pragma once

#include <stdexcept>
#include <string>

namespace bivar {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Source/target or dimension disagreement between homomorphisms or matrices.
class ShapeError : public Error {
public:
    using Error::Error;
};

class CospanMismatch : public Error {
public:
    using Error::Error;
};

/// Malformed site data, or a site whose universal-property invariant fails
/// when a comparison isomorphism is requested.
class SiteError : public Error {
public:
    using Error::Error;
};

class NotConfined : public Error {
public:
    using Error::Error;
};

class DegreeOverflow : public Error {
public:
    using Error::Error;
};

class MissingFinalObject : public Error {
public:
    using Error::Error;
};

class InvalidTransformation : public Error {
public:
    using Error::Error;
};

class MissingRingStructure : public Error {
public:
    using Error::Error;
};

/// Instance-file problems. `where()` is a line:column or a JSON pointer.
class SchemaError : public Error {
public:
    SchemaError(std::string where, const std::string& what)
        : Error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace bivar
