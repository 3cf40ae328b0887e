#pragma once

#include <stdexcept>
#include <string>

namespace layerstack {

/// Base error. `kind()` carries the stable machine-readable name that the CLI
/// maps to exit codes and that tests assert on.
class LsError : public std::runtime_error {
public:
    LsError(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define LAYERSTACK_DEFINE_ERROR(Name)                                 \
    class Name : public LsError {                                     \
    public:                                                           \
        explicit Name(const std::string& msg) : LsError(#Name, msg) {} \
    }

LAYERSTACK_DEFINE_ERROR(NotUnitVector);
LAYERSTACK_DEFINE_ERROR(NoBoundaryInBall);
LAYERSTACK_DEFINE_ERROR(MultipleCrossings);
LAYERSTACK_DEFINE_ERROR(NewtonStall);
LAYERSTACK_DEFINE_ERROR(MarginViolation);
LAYERSTACK_DEFINE_ERROR(EscapeFromBall);
LAYERSTACK_DEFINE_ERROR(SmallnessViolation);
LAYERSTACK_DEFINE_ERROR(PreconditionViolation);
LAYERSTACK_DEFINE_ERROR(AmbiguousOrientation);
LAYERSTACK_DEFINE_ERROR(TrichotomyViolation);
LAYERSTACK_DEFINE_ERROR(OutsideComposite);
LAYERSTACK_DEFINE_ERROR(SamplingInconclusive);
LAYERSTACK_DEFINE_ERROR(Inconclusive);
LAYERSTACK_DEFINE_ERROR(UnionNotInS);
LAYERSTACK_DEFINE_ERROR(MoreThanTwoClusters);
LAYERSTACK_DEFINE_ERROR(StackOrderViolation);
LAYERSTACK_DEFINE_ERROR(CenterNotOnBoundary);
LAYERSTACK_DEFINE_ERROR(NotOnBoundary);
LAYERSTACK_DEFINE_ERROR(OnInterface);
LAYERSTACK_DEFINE_ERROR(DuplicateShape);
LAYERSTACK_DEFINE_ERROR(LadderRefusal);
LAYERSTACK_DEFINE_ERROR(InputError);
LAYERSTACK_DEFINE_ERROR(VerificationFailure);

#undef LAYERSTACK_DEFINE_ERROR

}  // namespace layerstack
