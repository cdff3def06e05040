#include "mddr/datakit/dataset.hpp"

#include <algorithm>
#include <map>

#include "mddr/common/errors.hpp"
#include "mddr/common/rng.hpp"

namespace mddr::datakit {

const char* to_string(PadLabel label) { return label == PadLabel::live ? "live" : "spoof"; }

PadLabel pad_label_from_string(const std::string& s) {
    if (s == "live") return PadLabel::live;
    if (s == "spoof") return PadLabel::spoof;
    throw ValidationError("unknown pad_label '" + s + "' (expected live or spoof)");
}

DomainDataset::DomainDataset(std::string domain_id, std::vector<FaceSample> samples,
                             SplitTag split_tag)
    : domain_id_(std::move(domain_id)), samples_(std::move(samples)), split_tag_(split_tag) {
    for (const auto& s : samples_) {
        if (s.domain_id != domain_id_) {
            throw ValidationError("DomainDataset '" + domain_id_ + "': sample carries domain_id '" +
                                  s.domain_id + "'");
        }
    }
}

DomainDataset::DomainDataset(const DomainDataset& o)
    : domain_id_(o.domain_id_), samples_(o.samples_), split_tag_(o.split_tag_) {}

DomainDataset& DomainDataset::operator=(const DomainDataset& o) {
    if (this != &o) {
        domain_id_ = o.domain_id_;
        samples_ = o.samples_;
        split_tag_ = o.split_tag_;
        access_count_.store(0, std::memory_order_relaxed);
    }
    return *this;
}

DomainDataset::DomainDataset(DomainDataset&& o) noexcept
    : domain_id_(std::move(o.domain_id_)),
      samples_(std::move(o.samples_)),
      split_tag_(o.split_tag_),
      access_count_(o.access_count_.load(std::memory_order_relaxed)) {}

DomainDataset& DomainDataset::operator=(DomainDataset&& o) noexcept {
    if (this != &o) {
        domain_id_ = std::move(o.domain_id_);
        samples_ = std::move(o.samples_);
        split_tag_ = o.split_tag_;
        access_count_.store(o.access_count_.load(std::memory_order_relaxed),
                            std::memory_order_relaxed);
    }
    return *this;
}

std::vector<int> DomainDataset::subject_ids() const {
    std::vector<int> ids;
    for (const auto& s : samples_) ids.push_back(s.subject_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

size_t DomainDataset::count(PadLabel label) const {
    size_t n = 0;
    for (const auto& s : samples_) {
        if (s.pad_label == label) ++n;
    }
    return n;
}

bool DomainDataset::has_both_classes() const {
    return count(PadLabel::live) > 0 && count(PadLabel::spoof) > 0;
}

std::pair<DomainDataset, DomainDataset> split_train_val(const DomainDataset& dataset,
                                                        double val_fraction, uint64_t seed) {
    if (val_fraction < 0.0 || val_fraction >= 1.0) {
        throw ValidationError("split_train_val: val_fraction must be in [0, 1)");
    }

    // Group sample indices by (subject, label) so both splits keep class and
    // subject coverage where the group sizes allow it.
    std::map<std::pair<int, int>, std::vector<size_t>> groups;
    for (size_t i = 0; i < dataset.size(); ++i) {
        const auto& s = dataset.sample(i);
        groups[{s.subject_id, static_cast<int>(s.pad_label)}].push_back(i);
    }

    Rng rng(mix_seed(seed, "split/" + dataset.domain_id()));
    std::vector<char> in_val(dataset.size(), 0);
    for (auto& [key, idx] : groups) {
        const int n = static_cast<int>(idx.size());
        int n_val = static_cast<int>(val_fraction * n + 0.5);
        if (val_fraction > 0.0 && n >= 2 && n_val == 0) n_val = 1;
        if (n_val >= n) n_val = n - 1;  // keep at least one sample for training
        auto perm = rng.permutation(n);
        for (int k = 0; k < n_val; ++k) in_val[idx[static_cast<size_t>(perm[static_cast<size_t>(k)])]] = 1;
    }

    std::vector<FaceSample> train, val;
    for (size_t i = 0; i < dataset.size(); ++i) {
        (in_val[i] ? val : train).push_back(dataset.sample(i));
    }
    return {DomainDataset(dataset.domain_id(), std::move(train), SplitTag::train),
            DomainDataset(dataset.domain_id(), std::move(val), SplitTag::val)};
}

}  // namespace mddr::datakit
