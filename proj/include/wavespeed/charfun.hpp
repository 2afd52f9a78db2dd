#pragma once

#include "wavespeed/kernel.hpp"

namespace wavespeed {

/// Linearization slope p = g'(0) and delay h.
struct ModelParams {
    double p;
    double h;

    /// Throws InvalidArgument unless p > 1 and h >= 0.
    void validate() const;
};

/// psi and its analytic partials at one (z, eps).
struct PsiEval {
    double value;
    double dz;
    double dzz;
    double deps;
};

/// Smallest eps accepted by the characteristic-function evaluators.
inline constexpr double kMinEps = 1e-12;

/// Characteristic function of the linearization at the zero state,
///   psi(z, eps) = eps z^2 - z - 1 + p e^{-zh} M(sqrt(eps) z),
/// with eps = 1/c^2. Partials are closed-form in M, M', M''.
PsiEval psi_eval(double z, double eps, const ModelParams& params, const Kernel& k);

/// Residuals of the double-root system after the substitution w = sqrt(eps) z:
///   ew  = (1 + w/sqrt(eps) - w^2) e^{wh/sqrt(eps)} - p M(w)
///   eww = (h w^2/sqrt(eps) + (2 - h/eps) w - (1+h)/sqrt(eps)) e^{wh/sqrt(eps)} + p M'(w)
struct WformResiduals {
    double ew;
    double eww;
};

WformResiduals wform_residuals(double w, double eps, const ModelParams& params, const Kernel& k);

/// G(w) = 1 + w/sqrt(eps) - w^2.
double G_value(double w, double eps);
/// H(w) = G(w) e^{wh/sqrt(eps)}.
double H_value(double w, double eps, double h);
/// R(w) = p M(w).
double R_value(double w, double p, const Kernel& k);

}  // namespace wavespeed
