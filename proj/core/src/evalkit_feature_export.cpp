#include "mddr/evalkit/feature_export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mddr/common/errors.hpp"

namespace mddr::evalkit {

void export_features_csv(const Tensor& features, const std::vector<FeatureMeta>& meta,
                         const std::filesystem::path& path) {
    if (features.ndim() != 2) throw ShapeError("export_features_csv: features must be [N, D]");
    const int n = features.dim(0), dim = features.dim(1);
    if (n != static_cast<int>(meta.size())) {
        throw ShapeError("export_features_csv: features/meta length mismatch");
    }

    std::ostringstream os;
    os << "domain_id,subject_id,pad_label";
    for (int d = 0; d < dim; ++d) os << ",f" << d;
    os << "\n";

    char buf[40];
    for (int i = 0; i < n; ++i) {
        const auto& m = meta[static_cast<size_t>(i)];
        os << m.domain_id << "," << m.subject_id << "," << datakit::to_string(m.pad_label);
        for (int d = 0; d < dim; ++d) {
            std::snprintf(buf, sizeof(buf), "%.9g",
                          static_cast<double>(features[static_cast<int64_t>(i) * dim + d]));
            os << "," << buf;
        }
        os << "\n";
    }

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw IoError("export_features_csv: cannot write " + tmp);
        f << os.str();
        if (!f) throw IoError("export_features_csv: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace mddr::evalkit
