#pragma once

#include <stdexcept>
#include <string>

namespace prc {

enum class ErrorKind {
    invalid_input,
    bound_exceeded,
    pole_at_zero,
    non_unit_pivot,
    mixed_contexts,
    not_u_stable,
    degenerate_f,
    not_deformable,
    containment_violated,
    no_valid_aux_vector,
    all_minors_vanish,
    precondition,
    no_rational_witness,
    internal,
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::invalid_input: return "InvalidInput";
    case ErrorKind::bound_exceeded: return "BoundExceeded";
    case ErrorKind::pole_at_zero: return "PoleAtZero";
    case ErrorKind::non_unit_pivot: return "NonUnitPivot";
    case ErrorKind::mixed_contexts: return "MixedContexts";
    case ErrorKind::not_u_stable: return "NotUStable";
    case ErrorKind::degenerate_f: return "DegenerateF";
    case ErrorKind::not_deformable: return "NotDeformable";
    case ErrorKind::containment_violated: return "ContainmentViolated";
    case ErrorKind::no_valid_aux_vector: return "NoValidAuxVector";
    case ErrorKind::all_minors_vanish: return "AllMinorsVanish";
    case ErrorKind::precondition: return "PreconditionViolated";
    case ErrorKind::no_rational_witness: return "NoRationalWitness";
    case ErrorKind::internal: return "InternalError";
    }
    return "Error";
}

/// Every failure raised by the library carries a kind tag.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& what) { throw Error(k, what); }

inline void require(bool cond, ErrorKind k, const std::string& what) {
    if (!cond) fail(k, what);
}

} // namespace prc
