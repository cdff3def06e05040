#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mddr/datakit/dataset.hpp"

namespace mddr::datakit {

/// Recipe for a deterministic multi-domain dataset. Every sample is the sum
/// of a domain background (constant level plus seeded Gaussian pixel noise),
/// a per-subject blob pattern, and, for spoof samples, a domain-specific
/// artifact pipeline (additive sinusoidal grid, Gaussian blur, global color
/// shift). Identity and spoofness are independent factors: the blob pattern
/// added to a live sample and to the spoof sample with the same subject and
/// index is identical.
///
/// Per-domain fields hold either one value (broadcast) or num_domains values.
struct SyntheticSpec {
    int num_domains = 3;
    int subjects_per_domain = 4;
    int samples_per_subject_per_class = 2;
    int resolution = 32;
    int blob_count = 3;
    std::vector<double> spoof_grid_frequency = {5.0, 6.0, 7.0};  // cycles per image
    std::vector<double> spoof_blur_sigma = {0.5, 0.7, 0.9};
    std::vector<std::array<double, 3>> spoof_color_shift = {
        {0.05, 0.03, 0.03}, {0.03, 0.05, 0.03}, {0.03, 0.03, 0.05}};
    std::vector<double> domain_background_level = {0.45, 0.5, 0.55};
    std::vector<double> domain_noise_sigma = {0.02, 0.02, 0.02};
    uint64_t seed = 0;

    void validate() const;

    double grid_frequency(int domain) const;
    double blur_sigma(int domain) const;
    std::array<double, 3> color_shift(int domain) const;
    double background_level(int domain) const;
    double noise_sigma(int domain) const;

    /// Domain ids are "d0", "d1", ...
    std::string domain_id(int domain) const { return "d" + std::to_string(domain); }

    std::string to_json_string() const;
    static SyntheticSpec from_json_string(const std::string& s);
};

/// Pure function of (spec, spec.seed): identical specs yield bit-identical
/// datasets. Subject ids are globally unique across domains
/// (domain * subjects_per_domain + local index).
std::vector<DomainDataset> generate_synthetic_domains(const SyntheticSpec& spec);

}  // namespace mddr::datakit
