#pragma once

// Jacobi theta kernel
//
//   theta(u, tau) = - sum_j exp( pi i (j + 1/2)^2 tau + 2 pi i (j + 1/2)(u + 1/2) )
//
// summed over a symmetric j-range grown until double-precision stagnation,
// plus the derived functions
//
//   sigma_w(u) = theta(w - u) theta'(0) / (theta(w) theta(u)),
//   chi(u)     = theta'(u) / theta(u).
//
// theta' is the term-wise derivative.  Arguments within 1e-8 of the zero
// lattice Z + tau Z raise NearLatticeZero.

#include <complex>

#include "drmat/errors.hpp"

namespace drmat {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

namespace theta_detail {

struct ThetaPair {
    cplx value;
    cplx derivative;
};

inline ThetaPair theta_both(cplx u, cplx tau) {
    if (tau.imag() <= 0) throw Error("theta: Im tau must be positive");
    const cplx I(0.0, 1.0);
    cplx val = 0, der = 0;
    double peak = 0;
    // terms j and -1-j are paired symmetrically around -1/2
    for (int j = 0;; ++j) {
        cplx a(j + 0.5, 0.0), b(-j - 0.5, 0.0);
        cplx ta = std::exp(kPi * I * a * a * tau + 2.0 * kPi * I * a * (u + 0.5));
        cplx tb = std::exp(kPi * I * b * b * tau + 2.0 * kPi * I * b * (u + 0.5));
        val += ta + tb;
        der += 2.0 * kPi * I * (a * ta + b * tb);
        double mag = std::max(std::abs(ta), std::abs(tb));
        peak = std::max(peak, mag);
        if (j > 2 && mag < 1e-18 * std::max(peak, 1.0)) break;
        if (j > 4096) throw Error("theta: series failed to converge");
    }
    return {-val, -der};
}

// distance of u from the lattice Z + tau Z (in lattice coordinates)
inline double lattice_distance(cplx u, cplx tau) {
    double b = u.imag() / tau.imag();
    double a = u.real() - b * tau.real();
    double da = a - std::round(a);
    double db = b - std::round(b);
    return std::abs(da + db * tau);
}

} // namespace theta_detail

inline cplx theta(cplx u, cplx tau) { return theta_detail::theta_both(u, tau).value; }

inline cplx theta_prime(cplx u, cplx tau) {
    return theta_detail::theta_both(u, tau).derivative;
}

inline void guard_lattice(cplx u, cplx tau, const char* what) {
    if (theta_detail::lattice_distance(u, tau) < 1e-8)
        throw NearLatticeZero(std::string(what) + " within 1e-8 of a theta zero");
}

inline cplx sigma_w(cplx w, cplx u, cplx tau) {
    guard_lattice(u, tau, "sigma argument u");
    guard_lattice(w, tau, "sigma argument w");
    return theta(w - u, tau) * theta_prime(0.0, tau) / (theta(w, tau) * theta(u, tau));
}

inline cplx chi(cplx u, cplx tau) {
    guard_lattice(u, tau, "chi argument u");
    return theta_prime(u, tau) / theta(u, tau);
}

// d/dw sigma_w(u) = sigma_w(u) (chi(w - u) - chi(w))
inline cplx sigma_w_dw(cplx w, cplx u, cplx tau) {
    return sigma_w(w, u, tau) * (chi(w - u, tau) - chi(w, tau));
}

} // namespace drmat
