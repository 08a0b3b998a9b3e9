// Error hierarchy for the sphere-fsb library.
//
// Every failure the library can raise derives from spherefsb::Error, so the
// CLI layer can catch one base type, record the failure as data in the report,
// and keep going with the remaining work.
#pragma once

#include <stdexcept>
#include <string>

namespace spherefsb {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}

    // Stable machine-readable name of the concrete error type, recorded by
    // the report layer alongside the human-readable message.
    virtual const char* kind() const noexcept { return "Error"; }
};

#define SPHEREFSB_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& what) : Error(what) {}        \
        const char* kind() const noexcept override { return #Name; }   \
    }

// --- algebra kernel ---
SPHEREFSB_DEFINE_ERROR(NonSkewInput);          // vee() fed a matrix with a symmetric part
SPHEREFSB_DEFINE_ERROR(NonOrthogonalInput);    // Rotation constructed from a non-orthonormal matrix
SPHEREFSB_DEFINE_ERROR(NonUnitInput);          // UnitVector constructed from a non-unit vector
SPHEREFSB_DEFINE_ERROR(NearAntipodalRotation); // log requested at/near the angle-pi boundary

// --- integration ---
SPHEREFSB_DEFINE_ERROR(StepSizeUnderflow);     // adaptive step control stalled
SPHEREFSB_DEFINE_ERROR(PolarBandExit);         // chart trajectory left the admissible colatitude band
SPHEREFSB_DEFINE_ERROR(DegenerateClock);       // d(theta)/dt lost its sign; angle reparametrization invalid

// --- analysis ---
SPHEREFSB_DEFINE_ERROR(ChartDomainExceeded);        // chart evaluation outside the open unit disc
SPHEREFSB_DEFINE_ERROR(NewtonDivergence);           // root search left its trust region or stalled
SPHEREFSB_DEFINE_ERROR(StabilityCriterionMismatch); // first-order sign test and exact eigenvalues disagree
SPHEREFSB_DEFINE_ERROR(NonSimpleRoot);              // secant slope degenerated at a fixed-point search

// --- reconstruction ---
SPHEREFSB_DEFINE_ERROR(OffAxisResidualExceeded); // extracted generator too far from the symmetry axis
SPHEREFSB_DEFINE_ERROR(MonodromyNotAboutQ);      // per-period monodromy is not a rotation about Q
SPHEREFSB_DEFINE_ERROR(AmbiguousBranch);         // two drift candidates equally near zero

// --- configuration / reporting ---
SPHEREFSB_DEFINE_ERROR(ConfigError);     // config file or CLI argument problem (with location info)
SPHEREFSB_DEFINE_ERROR(ValidationError); // domain-type invariant violated (non-finite value, bad range, ...)

#undef SPHEREFSB_DEFINE_ERROR

} // namespace spherefsb
