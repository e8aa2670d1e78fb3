// errors.hpp: exception hierarchy shared by every module.
//
// Three coarse families drive the CLI exit-code mapping: SchemaError (bad
// input structure), PhysicsError (valid structure, invalid physics), and
// NumericalError (algorithmic failure). Leaf classes carry a stable kind tag
// so callers can report the failure by name without RTTI games.
#pragma once

#include <stdexcept>
#include <string>

namespace aqtm {

class Error : public std::runtime_error {
public:
    Error(const std::string& kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(kind) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// Input-structure problems (scenario files, overrides). Exit code 2.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error("SchemaError", msg) {}

protected:
    SchemaError(const std::string& kind, const std::string& msg) : Error(kind, msg) {}
};

// Physically invalid requests on structurally valid data. Exit code 3.
class PhysicsError : public Error {
public:
    explicit PhysicsError(const std::string& msg) : Error("PhysicsError", msg) {}

protected:
    PhysicsError(const std::string& kind, const std::string& msg) : Error(kind, msg) {}
};

// Algorithmic breakdown (non-convergence, blow-up). Exit code 4.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error("NumericalError", msg) {}

protected:
    NumericalError(const std::string& kind, const std::string& msg) : Error(kind, msg) {}
};

#define AQTM_ERROR_LEAF(Name, Base)                                             \
    class Name : public Base {                                                  \
    public:                                                                     \
        explicit Name(const std::string& msg) : Base(#Name, msg) {}             \
    };

// operator algebra
AQTM_ERROR_LEAF(ShapeError, PhysicsError)
AQTM_ERROR_LEAF(HermiticityError, PhysicsError)
AQTM_ERROR_LEAF(StateError, PhysicsError)
AQTM_ERROR_LEAF(DegenerateTemperatureError, PhysicsError)

// batteries and thermometry
AQTM_ERROR_LEAF(DomainError, PhysicsError)
AQTM_ERROR_LEAF(TruncationError, PhysicsError)
AQTM_ERROR_LEAF(UndefinedTemperatureError, PhysicsError)

// machine analytics
AQTM_ERROR_LEAF(BathModelError, PhysicsError)
AQTM_ERROR_LEAF(ValidityError, PhysicsError)
AQTM_ERROR_LEAF(TrivialExtractionError, PhysicsError)
AQTM_ERROR_LEAF(RegimeError, PhysicsError)
AQTM_ERROR_LEAF(DegenerateSteadyStateError, PhysicsError)

// dynamics and the brute-force generator
AQTM_ERROR_LEAF(UnsupportedBatteryError, PhysicsError)
AQTM_ERROR_LEAF(OracleSizeError, PhysicsError)
AQTM_ERROR_LEAF(PositivityError, NumericalError)
AQTM_ERROR_LEAF(StiffnessError, NumericalError)

#undef AQTM_ERROR_LEAF

}  // namespace aqtm
