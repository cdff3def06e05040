#include "mddr/datakit/synthetic.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "mddr/common/errors.hpp"
#include "mddr/common/rng.hpp"

namespace mddr::datakit {

using nlohmann::json;

namespace {

constexpr double kGridAmplitude = 0.15;
constexpr double kPi = 3.14159265358979323846;

template <typename T>
const T& broadcast_at(const std::vector<T>& v, int domain) {
    return v.size() == 1 ? v[0] : v[static_cast<size_t>(domain)];
}

template <typename T>
void check_per_domain(const std::vector<T>& v, int num_domains, const char* field) {
    if (v.size() != 1 && v.size() != static_cast<size_t>(num_domains)) {
        throw ValidationError(std::string("SyntheticSpec: ") + field + " must hold 1 or " +
                              std::to_string(num_domains) + " values, got " +
                              std::to_string(v.size()));
    }
}

struct Blob {
    double cx, cy, radius;
    double color[3];
};

std::vector<Blob> subject_blobs(const SyntheticSpec& spec, uint64_t base, int subject_id) {
    Rng rng(mix_seed(mix_seed(base, "identity"), static_cast<uint64_t>(subject_id)));
    std::vector<Blob> blobs(static_cast<size_t>(spec.blob_count));
    const double res = spec.resolution;
    for (auto& b : blobs) {
        b.cx = rng.uniform(0.2, 0.8) * res;
        b.cy = rng.uniform(0.2, 0.8) * res;
        b.radius = rng.uniform(0.10, 0.20) * res;
        for (double& c : b.color) c = rng.uniform(-0.45, 0.45);
    }
    return blobs;
}

/// The blob pattern shared by the live/spoof pair of one (subject, index).
Tensor sample_pattern(const SyntheticSpec& spec, uint64_t base, int subject_id, int index,
                      const std::vector<Blob>& blobs) {
    Rng rng(mix_seed(mix_seed(mix_seed(base, "pattern"), static_cast<uint64_t>(subject_id)),
                     static_cast<uint64_t>(index)));
    const int res = spec.resolution;
    const double amp_scale = rng.uniform(0.85, 1.15);
    std::vector<std::array<double, 2>> jitter(blobs.size());
    for (auto& j : jitter) {
        j[0] = rng.uniform(-0.05, 0.05) * res;
        j[1] = rng.uniform(-0.05, 0.05) * res;
    }

    Tensor pattern({3, res, res});
    for (size_t bi = 0; bi < blobs.size(); ++bi) {
        const Blob& b = blobs[bi];
        const double cx = b.cx + jitter[bi][0];
        const double cy = b.cy + jitter[bi][1];
        const double inv2r2 = 1.0 / (2.0 * b.radius * b.radius);
        for (int y = 0; y < res; ++y) {
            for (int x = 0; x < res; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                const double g = std::exp(-(dx * dx + dy * dy) * inv2r2) * amp_scale;
                for (int c = 0; c < 3; ++c) {
                    pattern.at3(c, y, x) += static_cast<float>(b.color[c] * g);
                }
            }
        }
    }
    return pattern;
}

void add_grid(Tensor& img, double frequency, int res) {
    if (frequency <= 0.0) return;
    for (int y = 0; y < res; ++y) {
        const double sy = std::sin(2.0 * kPi * frequency * (y + 0.5) / res);
        for (int x = 0; x < res; ++x) {
            const double sx = std::sin(2.0 * kPi * frequency * (x + 0.5) / res);
            const float v = static_cast<float>(kGridAmplitude * sy * sx);
            for (int c = 0; c < 3; ++c) img.at3(c, y, x) += v;
        }
    }
}

void gaussian_blur(Tensor& img, double sigma, int res) {
    if (sigma <= 0.0) return;
    const int radius = std::max(1, static_cast<int>(std::ceil(2.5 * sigma)));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[static_cast<size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += kernel[static_cast<size_t>(i + radius)];
    }
    for (double& k : kernel) k /= sum;

    auto clampi = [res](int v) { return v < 0 ? 0 : (v >= res ? res - 1 : v); };
    Tensor tmp({3, res, res});
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < res; ++y) {
            for (int x = 0; x < res; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    acc += kernel[static_cast<size_t>(i + radius)] * img.at3(c, y, clampi(x + i));
                }
                tmp.at3(c, y, x) = static_cast<float>(acc);
            }
        }
        for (int y = 0; y < res; ++y) {
            for (int x = 0; x < res; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    acc += kernel[static_cast<size_t>(i + radius)] * tmp.at3(c, clampi(y + i), x);
                }
                img.at3(c, y, x) = static_cast<float>(acc);
            }
        }
    }
}

}  // namespace

void SyntheticSpec::validate() const {
    if (num_domains < 2) throw ValidationError("SyntheticSpec: num_domains must be >= 2");
    if (subjects_per_domain < 2) {
        throw ValidationError("SyntheticSpec: subjects_per_domain must be >= 2");
    }
    if (samples_per_subject_per_class < 1) {
        throw ValidationError("SyntheticSpec: samples_per_subject_per_class must be >= 1");
    }
    if (resolution < 4) throw ValidationError("SyntheticSpec: resolution must be >= 4");
    if (blob_count < 1) throw ValidationError("SyntheticSpec: blob_count must be >= 1");
    check_per_domain(spoof_grid_frequency, num_domains, "spoof_grid_frequency");
    check_per_domain(spoof_blur_sigma, num_domains, "spoof_blur_sigma");
    check_per_domain(spoof_color_shift, num_domains, "spoof_color_shift");
    check_per_domain(domain_background_level, num_domains, "domain_background_level");
    check_per_domain(domain_noise_sigma, num_domains, "domain_noise_sigma");
    for (double v : spoof_grid_frequency) {
        if (v < 0.0) throw ValidationError("SyntheticSpec: spoof_grid_frequency must be >= 0");
    }
    for (double v : spoof_blur_sigma) {
        if (v < 0.0) throw ValidationError("SyntheticSpec: spoof_blur_sigma must be >= 0");
    }
    for (const auto& shift : spoof_color_shift) {
        for (double v : shift) {
            if (v < -0.3 || v > 0.3) {
                throw ValidationError("SyntheticSpec: spoof_color_shift values must lie in [-0.3, 0.3]");
            }
        }
    }
    for (double v : domain_background_level) {
        if (v < 0.0 || v > 1.0) {
            throw ValidationError("SyntheticSpec: domain_background_level must lie in [0, 1]");
        }
    }
    for (double v : domain_noise_sigma) {
        if (v < 0.0) throw ValidationError("SyntheticSpec: domain_noise_sigma must be >= 0");
    }
}

double SyntheticSpec::grid_frequency(int d) const { return broadcast_at(spoof_grid_frequency, d); }
double SyntheticSpec::blur_sigma(int d) const { return broadcast_at(spoof_blur_sigma, d); }
std::array<double, 3> SyntheticSpec::color_shift(int d) const {
    return broadcast_at(spoof_color_shift, d);
}
double SyntheticSpec::background_level(int d) const {
    return broadcast_at(domain_background_level, d);
}
double SyntheticSpec::noise_sigma(int d) const { return broadcast_at(domain_noise_sigma, d); }

std::vector<DomainDataset> generate_synthetic_domains(const SyntheticSpec& spec) {
    spec.validate();
    const uint64_t base = mix_seed(spec.seed, "synthetic");
    const int res = spec.resolution;

    std::vector<DomainDataset> out;
    out.reserve(static_cast<size_t>(spec.num_domains));
    for (int d = 0; d < spec.num_domains; ++d) {
        const std::string domain_id = spec.domain_id(d);
        const double bg = spec.background_level(d);
        const double sigma = spec.noise_sigma(d);
        const auto shift = spec.color_shift(d);

        std::vector<FaceSample> samples;
        samples.reserve(static_cast<size_t>(spec.subjects_per_domain) *
                        spec.samples_per_subject_per_class * 2);
        for (int sl = 0; sl < spec.subjects_per_domain; ++sl) {
            const int subject_id = d * spec.subjects_per_domain + sl;
            const auto blobs = subject_blobs(spec, base, subject_id);
            for (int idx = 0; idx < spec.samples_per_subject_per_class; ++idx) {
                const Tensor pattern = sample_pattern(spec, base, subject_id, idx, blobs);
                for (PadLabel label : {PadLabel::live, PadLabel::spoof}) {
                    Rng noise_rng(mix_seed(
                        mix_seed(mix_seed(mix_seed(base, "noise"), static_cast<uint64_t>(subject_id)),
                                 static_cast<uint64_t>(idx)),
                        static_cast<uint64_t>(label == PadLabel::live ? 1 : 2)));

                    Tensor img({3, res, res});
                    for (int64_t i = 0; i < img.numel(); ++i) {
                        img[i] = static_cast<float>(bg + sigma * noise_rng.normal()) + pattern[i];
                    }
                    if (label == PadLabel::spoof) {
                        add_grid(img, spec.grid_frequency(d), res);
                        gaussian_blur(img, spec.blur_sigma(d), res);
                        for (int c = 0; c < 3; ++c) {
                            const float sv = static_cast<float>(shift[static_cast<size_t>(c)]);
                            for (int y = 0; y < res; ++y) {
                                for (int x = 0; x < res; ++x) img.at3(c, y, x) += sv;
                            }
                        }
                    }
                    for (int64_t i = 0; i < img.numel(); ++i) {
                        img[i] = std::min(1.0f, std::max(0.0f, img[i]));
                    }

                    FaceSample s;
                    s.image = std::move(img);
                    s.pad_label = label;
                    s.subject_id = subject_id;
                    s.domain_id = domain_id;
                    samples.push_back(std::move(s));
                }
            }
        }
        out.emplace_back(domain_id, std::move(samples));
    }
    return out;
}

std::string SyntheticSpec::to_json_string() const {
    json shifts = json::array();
    for (const auto& s : spoof_color_shift) shifts.push_back({s[0], s[1], s[2]});
    json j{{"num_domains", num_domains},
           {"subjects_per_domain", subjects_per_domain},
           {"samples_per_subject_per_class", samples_per_subject_per_class},
           {"resolution", resolution},
           {"blob_count", blob_count},
           {"spoof_grid_frequency", spoof_grid_frequency},
           {"spoof_blur_sigma", spoof_blur_sigma},
           {"spoof_color_shift", shifts},
           {"domain_background_level", domain_background_level},
           {"domain_noise_sigma", domain_noise_sigma},
           {"seed", seed}};
    return j.dump();
}

SyntheticSpec SyntheticSpec::from_json_string(const std::string& s) {
    json j = json::parse(s);
    SyntheticSpec spec;
    spec.num_domains = j.at("num_domains").get<int>();
    spec.subjects_per_domain = j.at("subjects_per_domain").get<int>();
    spec.samples_per_subject_per_class = j.at("samples_per_subject_per_class").get<int>();
    if (j.contains("resolution")) spec.resolution = j.at("resolution").get<int>();
    if (j.contains("blob_count")) spec.blob_count = j.at("blob_count").get<int>();
    if (j.contains("spoof_grid_frequency")) {
        spec.spoof_grid_frequency = j.at("spoof_grid_frequency").get<std::vector<double>>();
    }
    if (j.contains("spoof_blur_sigma")) {
        spec.spoof_blur_sigma = j.at("spoof_blur_sigma").get<std::vector<double>>();
    }
    if (j.contains("spoof_color_shift")) {
        spec.spoof_color_shift.clear();
        for (const auto& row : j.at("spoof_color_shift")) {
            if (!row.is_array() || row.size() != 3) {
                throw ValidationError("SyntheticSpec: spoof_color_shift entries must be 3-vectors");
            }
            spec.spoof_color_shift.push_back(
                {row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
        }
    }
    if (j.contains("domain_background_level")) {
        spec.domain_background_level = j.at("domain_background_level").get<std::vector<double>>();
    }
    if (j.contains("domain_noise_sigma")) {
        spec.domain_noise_sigma = j.at("domain_noise_sigma").get<std::vector<double>>();
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<uint64_t>();
    spec.validate();
    return spec;
}

}  // namespace mddr::datakit
