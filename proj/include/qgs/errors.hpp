#pragma once

#include <stdexcept>
#include <string>

namespace qgs {

enum class ErrorKind {
    DisconnectedGraph,
    IndexArityMismatch,
    RankDeficientIndices,
    EulerViolation,
    UnknownBuiltin,
    InvalidGraph,
    DimensionMismatch,
    NonHermitianInput,
    OutOfRange,
    DirichletPoint,
    ThetaZero,
    RankAnomaly,
    SinSingular,
    DegenerateFiber,
    UnknownEdge,
    TailTooLarge,
    EmptyPotential,
    InvalidPotential,
    InvalidEnergy,
    NearSingularEnergy,
};

inline const char* kind_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::IndexArityMismatch: return "IndexArityMismatch";
    case ErrorKind::RankDeficientIndices: return "RankDeficientIndices";
    case ErrorKind::EulerViolation: return "EulerViolation";
    case ErrorKind::UnknownBuiltin: return "UnknownBuiltin";
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DirichletPoint: return "DirichletPoint";
    case ErrorKind::ThetaZero: return "ThetaZero";
    case ErrorKind::RankAnomaly: return "RankAnomaly";
    case ErrorKind::SinSingular: return "SinSingular";
    case ErrorKind::DegenerateFiber: return "DegenerateFiber";
    case ErrorKind::UnknownEdge: return "UnknownEdge";
    case ErrorKind::TailTooLarge: return "TailTooLarge";
    case ErrorKind::EmptyPotential: return "EmptyPotential";
    case ErrorKind::InvalidPotential: return "InvalidPotential";
    case ErrorKind::InvalidEnergy: return "InvalidEnergy";
    case ErrorKind::NearSingularEnergy: return "NearSingularEnergy";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace qgs
