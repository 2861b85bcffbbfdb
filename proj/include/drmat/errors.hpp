#pragma once

#include <stdexcept>
#include <string>

namespace drmat {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define DRMAT_ERROR_TYPE(Name)                                   \
    struct Name : Error {                                        \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

DRMAT_ERROR_TYPE(NotFiniteType);
DRMAT_ERROR_TYPE(UnsupportedRank);
DRMAT_ERROR_TYPE(AlgebraMismatch);
DRMAT_ERROR_TYPE(BadSlot);
DRMAT_ERROR_TYPE(NonOrthonormalBasis);
DRMAT_ERROR_TYPE(NotBijective);
DRMAT_ERROR_TYPE(NotIsometric);
DRMAT_ERROR_TYPE(DegenerateTriple);
DRMAT_ERROR_TYPE(OutsideDomain);
DRMAT_ERROR_TYPE(NearPole);
DRMAT_ERROR_TYPE(MethodDisagreement);
DRMAT_ERROR_TYPE(CapExceeded);
DRMAT_ERROR_TYPE(WeightConstraintViolated);
DRMAT_ERROR_TYPE(TruncationTooSmall);
DRMAT_ERROR_TYPE(NuNotPerp);
DRMAT_ERROR_TYPE(NearLatticeZero);
DRMAT_ERROR_TYPE(NotAutomorphism);
DRMAT_ERROR_TYPE(CutoffTooSmall);
DRMAT_ERROR_TYPE(UsageError);
DRMAT_ERROR_TYPE(BadTripleFile);

#undef DRMAT_ERROR_TYPE

// Signals the Kac-Kazhdan locus during an intertwiner solve; callers
// resample the highest weight and retry.
struct ShapovalovSingular : Error {
    int degree;
    explicit ShapovalovSingular(int deg, const std::string& msg = "")
        : Error("ShapovalovSingular at degree " + std::to_string(deg) +
                (msg.empty() ? "" : ": " + msg)),
          degree(deg) {}
};

} // namespace drmat
