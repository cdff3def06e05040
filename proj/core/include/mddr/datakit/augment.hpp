#pragma once

#include "mddr/common/rng.hpp"
#include "mddr/datakit/dataset.hpp"

namespace mddr::datakit {

/// Augmentation toggles. Every enabled step consumes a fixed number of rng
/// draws, so the output is a pure function of (sample, rng state, policy).
struct AugmentPolicy {
    bool horizontal_flip = false;  // applied with probability 0.5
    bool rotate = false;           // uniform angle within +-15 degrees
    bool scale_crop = false;       // crop scale uniform in [0.8, 1.0], resized back
    bool color_jitter = false;     // brightness and contrast within +-10%

    bool any() const { return horizontal_flip || rotate || scale_crop || color_jitter; }
};

/// Label, subject and domain are never touched; the image keeps its shape
/// and is re-clipped to [0,1]. An empty policy returns the sample unchanged.
FaceSample augment(const FaceSample& sample, Rng& rng, const AugmentPolicy& policy);

/// Mirror a CHW image on the width axis (an involution).
Tensor mirror_horizontal(const Tensor& image);

}  // namespace mddr::datakit
