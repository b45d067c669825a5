#include "raman/spdc.hpp"

#include <cmath>

#include "raman/errors.hpp"

namespace raman {

TwoModeMoments SpdcMoments::as_two_mode() const {
    TwoModeMoments m;
    m.b_s = b;
    m.b_a = b;
    m.d_sa = d;
    return m;
}

SpdcMoments spdc_moments(double gz) {
    if (!(gz >= 0.0) || !std::isfinite(gz)) throw DomainError("gz must be >= 0");
    const double sh = std::sinh(gz);
    return {sh * sh, sh * std::cosh(gz)};
}

SpdcMoments spdc_matched(double n_mean) {
    if (!(n_mean >= 0.0) || !std::isfinite(n_mean)) throw DomainError("mean photon number must be >= 0");
    return {n_mean, std::sqrt(n_mean * (n_mean + 1.0))};
}

}  // namespace raman
