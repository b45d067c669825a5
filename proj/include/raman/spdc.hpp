#pragma once

#include "raman/core_model.hpp"

namespace raman {

// Twin-beam moments: B_s = B_i = b, D_si = d >= 0.
struct SpdcMoments {
    double b = 0.0;
    double d = 0.0;

    // Same state expressed as two-mode characteristic-function coefficients.
    TwoModeMoments as_two_mode() const;
};

SpdcMoments spdc_moments(double gz);
// Twin beam with the given mean signal/idler photon number.
SpdcMoments spdc_matched(double n_mean);

}  // namespace raman
