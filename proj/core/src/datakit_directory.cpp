#include "mddr/datakit/directory.hpp"

#include <fstream>
#include <sstream>

#include "mddr/common/errors.hpp"
#include "mddr/datakit/png_io.hpp"
#include "mddr/datakit/preprocess.hpp"

namespace mddr::datakit {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

DomainDataset load_directory_dataset(const std::filesystem::path& dir,
                                     const std::string& domain_id, int resolution) {
    const auto index_path = dir / "index.csv";
    std::ifstream index(index_path);
    if (!index) {
        throw IoError("dataset index not found: " + index_path.string());
    }

    std::string line;
    if (!std::getline(index, line)) {
        throw ValidationError("empty dataset index: " + index_path.string());
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,pad_label,subject_id") {
        throw ValidationError("bad index header in " + index_path.string() +
                              " (expected 'path,pad_label,subject_id')");
    }

    std::vector<FaceSample> samples;
    int row = 1;
    while (std::getline(index, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_row(line);
        if (fields.size() != 3) {
            throw ValidationError("index row " + std::to_string(row) + ": expected 3 fields, got " +
                                  std::to_string(fields.size()));
        }
        FaceSample s;
        try {
            s.pad_label = pad_label_from_string(fields[1]);
        } catch (const ValidationError& e) {
            throw ValidationError("index row " + std::to_string(row) + ": " + e.what());
        }
        try {
            size_t pos = 0;
            s.subject_id = std::stoi(fields[2], &pos);
            if (pos != fields[2].size() || s.subject_id < 0) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ValidationError("index row " + std::to_string(row) +
                                  ": subject_id must be a non-negative integer, got '" + fields[2] + "'");
        }
        try {
            const auto img = read_png_rgb(dir / fields[0]);
            s.image = preprocess(image_u8_to_float(img), resolution);
        } catch (const IoError& e) {
            throw IoError("index row " + std::to_string(row) + ": " + e.what());
        }
        s.domain_id = domain_id;
        samples.push_back(std::move(s));
    }
    return DomainDataset(domain_id, std::move(samples));
}

void export_directory_dataset(const DomainDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");

    std::ostringstream index;
    index << "path,pad_label,subject_id\n";
    for (size_t i = 0; i < dataset.size(); ++i) {
        const auto& s = dataset.sample(i);
        char name[32];
        std::snprintf(name, sizeof(name), "%04zu.png", i);
        const std::string rel = std::string("images/") + name;
        write_png_rgb(dir / rel, float_to_image_u8(s.image));
        index << rel << "," << to_string(s.pad_label) << "," << s.subject_id << "\n";
    }

    const auto tmp = dir / "index.csv.tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw IoError("cannot write " + tmp.string());
        os << index.str();
    }
    std::filesystem::rename(tmp, dir / "index.csv");
}

}  // namespace mddr::datakit
