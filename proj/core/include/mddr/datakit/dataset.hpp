#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mddr/common/tensor.hpp"

namespace mddr::datakit {

enum class PadLabel { spoof = 0, live = 1 };

const char* to_string(PadLabel label);
PadLabel pad_label_from_string(const std::string& s);  // throws ValidationError

enum class SplitTag { train, val, test };

/// One face image with its liveness label, subject identity and domain tag.
/// Images are 3xHxW with values in [0,1].
struct FaceSample {
    Tensor image;
    PadLabel pad_label = PadLabel::live;
    int subject_id = 0;
    std::string domain_id;
};

/// Immutable ordered collection of samples from a single domain. Sample
/// access is counted, which lets tests assert that training one domain never
/// touches another domain's data.
class DomainDataset {
public:
    DomainDataset() = default;
    DomainDataset(std::string domain_id, std::vector<FaceSample> samples,
                  SplitTag split_tag = SplitTag::train);

    DomainDataset(const DomainDataset& o);
    DomainDataset& operator=(const DomainDataset& o);
    DomainDataset(DomainDataset&& o) noexcept;
    DomainDataset& operator=(DomainDataset&& o) noexcept;

    const std::string& domain_id() const { return domain_id_; }
    SplitTag split_tag() const { return split_tag_; }
    size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    /// Counted access; trainers must read samples through this.
    const FaceSample& sample(size_t i) const {
        access_count_.fetch_add(1, std::memory_order_relaxed);
        return samples_[i];
    }

    uint64_t access_count() const { return access_count_.load(std::memory_order_relaxed); }
    void reset_access_count() const { access_count_.store(0, std::memory_order_relaxed); }

    /// Sorted unique subject ids.
    std::vector<int> subject_ids() const;
    size_t count(PadLabel label) const;
    bool has_both_classes() const;

private:
    std::string domain_id_;
    std::vector<FaceSample> samples_;
    SplitTag split_tag_ = SplitTag::train;
    mutable std::atomic<uint64_t> access_count_{0};
};

/// Deterministic stratified split (per pad label within each subject) into
/// train and val subsets. Sample order within each side follows the source.
std::pair<DomainDataset, DomainDataset> split_train_val(const DomainDataset& dataset,
                                                        double val_fraction, uint64_t seed);

}  // namespace mddr::datakit
