#include "wavespeed/charfun.hpp"

#include "wavespeed/error.hpp"

#include <cmath>
#include <sstream>

namespace wavespeed {

void ModelParams::validate() const {
    if (!(p > 1.0) || !std::isfinite(p)) {
        std::ostringstream os;
        os << "p = " << p << " violates the monostable hypothesis p = g'(0) > 1";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    if (!(h >= 0.0) || !std::isfinite(h)) {
        std::ostringstream os;
        os << "delay h = " << h << " must be finite and >= 0";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
}

namespace {

void check_eps(double eps) {
    if (!(eps >= kMinEps) || !std::isfinite(eps)) {
        std::ostringstream os;
        os << "eps = " << eps << " below the guarded minimum " << kMinEps;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
}

double checked_exp(double x) {
    if (x > 700.0) throw Error(ErrorCode::Overflow, "exponential overflow in w-form residual");
    return std::exp(x);
}

}  // namespace

PsiEval psi_eval(double z, double eps, const ModelParams& params, const Kernel& k) {
    check_eps(eps);
    const double u = std::sqrt(eps);
    const double lam = u * z;
    const double m0 = k.mgf(lam);
    const double m1 = k.mgf_deriv(lam);
    const double m2 = k.mgf_deriv2(lam);
    const double delay = params.p * std::exp(-z * params.h);
    const double h = params.h;

    PsiEval out{};
    out.value = eps * z * z - z - 1.0 + delay * m0;
    out.dz = 2.0 * eps * z - 1.0 + delay * (u * m1 - h * m0);
    out.dzz = 2.0 * eps + delay * (h * h * m0 - 2.0 * h * u * m1 + eps * m2);
    // d/deps M(sqrt(eps) z) = M'(lam) z / (2 sqrt(eps))
    out.deps = z * z + delay * m1 * z / (2.0 * u);
    return out;
}

WformResiduals wform_residuals(double w, double eps, const ModelParams& params, const Kernel& k) {
    check_eps(eps);
    const double u = std::sqrt(eps);
    const double h = params.h;
    const double growth = checked_exp(w * h / u);
    WformResiduals r{};
    r.ew = G_value(w, eps) * growth - params.p * k.mgf(w);
    r.eww = (h * w * w / u + (2.0 - h / eps) * w - (1.0 + h) / u) * growth + params.p * k.mgf_deriv(w);
    return r;
}

double G_value(double w, double eps) {
    check_eps(eps);
    return 1.0 + w / std::sqrt(eps) - w * w;
}

double H_value(double w, double eps, double h) {
    return G_value(w, eps) * checked_exp(w * h / std::sqrt(eps));
}

double R_value(double w, double p, const Kernel& k) { return p * k.mgf(w); }

}  // namespace wavespeed
