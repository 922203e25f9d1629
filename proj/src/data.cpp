// Copyright 2025 The postvar developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "postvar/data.hpp"

#include "postvar/rng.hpp"
#include "postvar/textio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace postvar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path, std::int64_t& offset) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() != 4) {
        throw std::runtime_error(path + ": truncated at byte " + std::to_string(offset));
    }
    offset += 4;
    return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
           (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
}

void write_be32(std::ostream& out, std::uint32_t value) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(value >> 24), static_cast<unsigned char>(value >> 16),
        static_cast<unsigned char>(value >> 8), static_cast<unsigned char>(value)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

double clamp_angle(double value) {
    if (value < 0.0) {
        return 0.0;
    }
    if (value >= kTwoPi) {
        return std::nextafter(kTwoPi, 0.0);
    }
    return value;
}

void check_synth_params(const SynthParams& p) {
    std::string problems;
    if (p.count < 1) problems += " count<1";
    if (p.feature_count < 1) problems += " feature_count<1";
    if (p.qubits < 1) problems += " qubits<1";
    if (p.feature_count % p.qubits != 0) problems += " feature_count%qubits!=0";
    if (p.noise < 0.0) problems += " noise<0";
    if (p.label_noise < 0.0) problems += " label_noise<0";
    if (!(p.low >= 0.0 && p.low < p.high && p.high < kTwoPi)) problems += " bad-range";
    if (!problems.empty()) {
        throw std::invalid_argument("invalid synth params:" + problems);
    }
}

}  // namespace

std::vector<Eigen::Index> Dataset::train_rows() const {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < size(); ++i) {
        if (split.empty() || split[static_cast<std::size_t>(i)] == 0) {
            rows.push_back(i);
        }
    }
    return rows;
}

std::vector<Eigen::Index> Dataset::test_rows() const {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < size(); ++i) {
        if (!split.empty() && split[static_cast<std::size_t>(i)] == 1) {
            rows.push_back(i);
        }
    }
    return rows;
}

Dataset dataset_subset(const Dataset& dataset, std::span<const Eigen::Index> rows) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), dataset.feature_count());
    out.labels.resize(static_cast<Eigen::Index>(rows.size()));
    out.ids.reserve(rows.size());
    Eigen::Index cursor = 0;
    for (const Eigen::Index row : rows) {
        if (row < 0 || row >= dataset.size()) {
            throw std::invalid_argument("dataset row index out of range");
        }
        out.features.row(cursor) = dataset.features.row(row);
        out.labels(cursor) = dataset.labels(row);
        out.ids.push_back(dataset.ids.empty() ? static_cast<std::int64_t>(row)
                                              : dataset.ids[static_cast<std::size_t>(row)]);
        ++cursor;
    }
    return out;
}

RawImages load_idx_images(const std::string& images_path, const std::string& labels_path) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) {
        throw std::runtime_error("cannot open " + images_path);
    }
    std::int64_t offset = 0;
    const std::uint32_t magic = read_be32(images, images_path, offset);
    if (magic != kImageMagic) {
        char found[16];
        std::snprintf(found, sizeof(found), "0x%08x", magic);
        throw std::runtime_error(images_path + ": bad image magic " + found +
                                 " at byte 0");
    }
    const std::uint32_t count = read_be32(images, images_path, offset);
    const std::uint32_t rows = read_be32(images, images_path, offset);
    const std::uint32_t cols = read_be32(images, images_path, offset);
    if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) {
        throw std::runtime_error(images_path + ": implausible image shape");
    }

    RawImages out;
    out.rows = static_cast<int>(rows);
    out.cols = static_cast<int>(cols);
    out.pixels.resize(count);
    const std::size_t image_bytes = static_cast<std::size_t>(rows) * cols;
    for (std::uint32_t i = 0; i < count; ++i) {
        auto& image = out.pixels[i];
        image.resize(image_bytes);
        images.read(reinterpret_cast<char*>(image.data()),
                    static_cast<std::streamsize>(image_bytes));
        if (images.gcount() != static_cast<std::streamsize>(image_bytes)) {
            throw std::runtime_error(images_path + ": truncated at byte " +
                                     std::to_string(offset + images.gcount()));
        }
        offset += static_cast<std::int64_t>(image_bytes);
    }

    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) {
        throw std::runtime_error("cannot open " + labels_path);
    }
    std::int64_t label_offset = 0;
    const std::uint32_t label_magic = read_be32(labels, labels_path, label_offset);
    if (label_magic != kLabelMagic) {
        char found[16];
        std::snprintf(found, sizeof(found), "0x%08x", label_magic);
        throw std::runtime_error(labels_path + ": bad label magic " + found +
                                 " at byte 0");
    }
    const std::uint32_t label_count = read_be32(labels, labels_path, label_offset);
    if (label_count != count) {
        throw std::runtime_error("image/label count mismatch: " + std::to_string(count) +
                                 " images vs " + std::to_string(label_count) + " labels");
    }
    out.labels.resize(label_count);
    labels.read(reinterpret_cast<char*>(out.labels.data()),
                static_cast<std::streamsize>(label_count));
    if (labels.gcount() != static_cast<std::streamsize>(label_count)) {
        throw std::runtime_error(labels_path + ": truncated at byte " +
                                 std::to_string(label_offset + labels.gcount()));
    }
    return out;
}

void write_idx_images(const std::string& images_path, const std::string& labels_path,
                      const RawImages& images) {
    if (images.pixels.size() != images.labels.size()) {
        throw std::invalid_argument("image/label count mismatch");
    }
    std::ofstream image_file(images_path, std::ios::binary);
    if (!image_file) {
        throw std::runtime_error("cannot write " + images_path);
    }
    write_be32(image_file, kImageMagic);
    write_be32(image_file, static_cast<std::uint32_t>(images.pixels.size()));
    write_be32(image_file, static_cast<std::uint32_t>(images.rows));
    write_be32(image_file, static_cast<std::uint32_t>(images.cols));
    const std::size_t image_bytes =
        static_cast<std::size_t>(images.rows) * static_cast<std::size_t>(images.cols);
    for (const auto& image : images.pixels) {
        if (image.size() != image_bytes) {
            throw std::invalid_argument("image pixel count does not match the shape");
        }
        image_file.write(reinterpret_cast<const char*>(image.data()),
                         static_cast<std::streamsize>(image.size()));
    }

    std::ofstream label_file(labels_path, std::ios::binary);
    if (!label_file) {
        throw std::runtime_error("cannot write " + labels_path);
    }
    write_be32(label_file, kLabelMagic);
    write_be32(label_file, static_cast<std::uint32_t>(images.labels.size()));
    label_file.write(reinterpret_cast<const char*>(images.labels.data()),
                     static_cast<std::streamsize>(images.labels.size()));
}

std::array<double, 16> preprocess_image(std::span<const std::uint8_t> pixels) {
    if (pixels.size() != 28 * 28) {
        throw std::invalid_argument("preprocessing expects a 28x28 image");
    }
    std::array<double, 16> features{};
    for (int block_row = 0; block_row < 4; ++block_row) {
        for (int block_col = 0; block_col < 4; ++block_col) {
            std::uint8_t peak = 0;
            for (int r = 0; r < 7; ++r) {
                for (int c = 0; c < 7; ++c) {
                    const std::size_t idx = static_cast<std::size_t>(
                        (block_row * 7 + r) * 28 + block_col * 7 + c);
                    peak = std::max(peak, pixels[idx]);
                }
            }
            features[static_cast<std::size_t>(block_row * 4 + block_col)] =
                static_cast<double>(peak) * kTwoPi / 256.0;
        }
    }
    return features;
}

SynthKind synth_kind_from_string(const std::string& name) {
    if (name == "blobs") return SynthKind::kBlobs;
    if (name == "parity") return SynthKind::kParity;
    if (name == "linear") return SynthKind::kLinear;
    throw std::invalid_argument("unknown synthetic dataset kind: " + name);
}

std::string to_string(SynthKind kind) {
    switch (kind) {
        case SynthKind::kBlobs:
            return "blobs";
        case SynthKind::kParity:
            return "parity";
        case SynthKind::kLinear:
            return "linear";
    }
    return "?";
}

SynthDataset synth_dataset(SynthKind kind, const SynthParams& params, std::uint64_t seed) {
    check_synth_params(params);
    const int d = params.count;
    const int l = params.feature_count;
    const int n = params.qubits;

    SynthDataset out;
    out.dataset.features.resize(d, l);
    out.dataset.labels.resize(d);
    out.dataset.ids.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        out.dataset.ids[static_cast<std::size_t>(i)] = i;
    }

    Rng rng(derive_seed(seed, 0xdaf0));

    switch (kind) {
        case SynthKind::kBlobs: {
            // Two latent centres per class arranged XOR-wise on two
            // encoder-visible coordinates (row 1, qubits 0 and 1); every
            // other coordinate sits at a fixed midpoint.  No hyperplane
            // separates the four centres on the latent plane.
            if (l < n + 2) {
                throw std::invalid_argument("blobs need at least one full encoding row plus two features");
            }
            const double base = std::numbers::pi;
            const double lo = std::numbers::pi / 4.0;
            const double hi = 3.0 * std::numbers::pi / 4.0;
            const int f0 = n;      // encoding row 1, qubit 0
            const int f1 = n + 1;  // encoding row 1, qubit 1
            int per_class_cursor[2] = {0, 0};
            for (int i = 0; i < d; ++i) {
                const int label = i % 2;
                const int variant = per_class_cursor[label]++ % 2;
                // class 0: (lo, lo) / (hi, hi); class 1: (lo, hi) / (hi, lo)
                const double a = variant == 0 ? lo : hi;
                const double b = (label == 0) == (variant == 0) ? lo : hi;
                for (int j = 0; j < l; ++j) {
                    double value = base;
                    if (j == f0) value = a;
                    if (j == f1) value = b;
                    if (params.noise > 0.0) {
                        value += params.noise * rng.normal();
                    }
                    out.dataset.features(i, j) = clamp_angle(value);
                }
                out.dataset.labels(i) = label;
            }
            break;
        }
        case SynthKind::kParity: {
            // One bit per qubit on encoding row 1; the label is their XOR.
            // The final bit is adjusted so classes alternate deterministically.
            if (l < 2 * n) {
                throw std::invalid_argument("parity needs at least two encoding rows");
            }
            const double lo = params.low;
            const double hi = params.high > params.low ? params.high : std::numbers::pi;
            for (int i = 0; i < d; ++i) {
                const int target = i % 2;
                int parity = 0;
                std::vector<int> bits(static_cast<std::size_t>(n), 0);
                for (int q = 0; q + 1 < n; ++q) {
                    bits[static_cast<std::size_t>(q)] = static_cast<int>(rng.uniform_int(2));
                    parity ^= bits[static_cast<std::size_t>(q)];
                }
                bits[static_cast<std::size_t>(n - 1)] = parity ^ target;
                for (int j = 0; j < l; ++j) {
                    out.dataset.features(i, j) = lo;
                }
                for (int q = 0; q < n; ++q) {
                    out.dataset.features(i, n + q) = bits[static_cast<std::size_t>(q)] ? hi : lo;
                }
                out.dataset.labels(i) = target;
            }
            break;
        }
        case SynthKind::kLinear: {
            // Features uniform in [low, high); labels <w, x> for a planted
            // weight vector the encoder exposes at first order.  The
            // alternating-rotation encoder reads each qubit's X-rotation
            // angles only through their sum (the Z row on |0> is a global
            // phase and the interleaved Z rows enter at second order), so
            // the weights are tied across the odd rows of every qubit.
            Eigen::VectorXd weights = Eigen::VectorXd::Zero(l);
            const int rows = l / n;
            double norm_sq = 0.0;
            for (int qubit = 0; qubit < n; ++qubit) {
                const double tied = rng.normal();
                for (int r = 1; r < rows; r += 2) {
                    weights(r * n + qubit) = tied;
                    norm_sq += tied * tied;
                }
            }
            if (norm_sq > 0.0) {
                weights /= std::sqrt(norm_sq);
            }
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < l; ++j) {
                    out.dataset.features(i, j) = rng.uniform(params.low, params.high);
                }
                double label = weights.dot(out.dataset.features.row(i));
                if (params.label_noise > 0.0) {
                    label += params.label_noise * rng.normal();
                }
                out.dataset.labels(i) = label;
            }
            out.planted_weights = weights;
            break;
        }
    }
    return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset,
                       std::span<const std::string> extra_header) {
    for (const std::string& line : extra_header) {
        out << "# " << line << "\n";
    }
    out << "id,label";
    for (Eigen::Index j = 0; j < dataset.feature_count(); ++j) {
        out << ",f" << j;
    }
    out << "\n";
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
        out << (dataset.ids.empty() ? static_cast<std::int64_t>(i)
                                    : dataset.ids[static_cast<std::size_t>(i)]);
        out << ',' << format_double(dataset.labels(i));
        for (Eigen::Index j = 0; j < dataset.feature_count(); ++j) {
            out << ',' << format_double(dataset.features(i, j));
        }
        out << "\n";
    }
}

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        header = split_csv_line(line);
        break;
    }
    if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
        throw std::runtime_error("dataset CSV must start with id,label columns");
    }
    const auto width = static_cast<Eigen::Index>(header.size() - 2);

    std::vector<std::int64_t> ids;
    std::vector<double> labels;
    std::vector<double> cells;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != width + 2) {
            throw std::runtime_error("dataset CSV row has wrong field count");
        }
        ids.push_back(std::stoll(fields[0]));
        labels.push_back(parse_double(fields[1]));
        for (Eigen::Index j = 0; j < width; ++j) {
            cells.push_back(parse_double(fields[static_cast<std::size_t>(j + 2)]));
        }
    }

    Dataset dataset;
    const auto count = static_cast<Eigen::Index>(ids.size());
    dataset.features.resize(count, width);
    dataset.labels.resize(count);
    dataset.ids = std::move(ids);
    for (Eigen::Index i = 0; i < count; ++i) {
        dataset.labels(i) = labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < width; ++j) {
            dataset.features(i, j) = cells[static_cast<std::size_t>(i * width + j)];
        }
    }
    return dataset;
}

Dataset load_fashion_binary(const std::string& directory, int class_a, int class_b,
                            int train_per_class, int test_per_class,
                            std::uint64_t seed) {
    const auto pick_rows = [&](const RawImages& raw, int wanted_label, int count,
                               std::uint64_t stream) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < raw.labels.size(); ++i) {
            if (raw.labels[i] == wanted_label) {
                candidates.push_back(i);
            }
        }
        if (static_cast<int>(candidates.size()) < count) {
            throw std::runtime_error("not enough samples of class " +
                                     std::to_string(wanted_label));
        }
        // Fisher-Yates with a derived stream, then keep the head.
        Rng rng(derive_seed(seed, stream, static_cast<std::uint64_t>(wanted_label)));
        for (std::size_t i = candidates.size() - 1; i > 0; --i) {
            const std::size_t j = rng.uniform_int(i + 1);
            std::swap(candidates[i], candidates[j]);
        }
        candidates.resize(static_cast<std::size_t>(count));
        return candidates;
    };

    const RawImages train_raw = load_idx_images(directory + "/train-images-idx3-ubyte",
                                                directory + "/train-labels-idx1-ubyte");
    const RawImages test_raw = load_idx_images(directory + "/t10k-images-idx3-ubyte",
                                               directory + "/t10k-labels-idx1-ubyte");

    const int total = 2 * (train_per_class + test_per_class);
    Dataset dataset;
    dataset.features.resize(total, 16);
    dataset.labels.resize(total);
    dataset.ids.resize(static_cast<std::size_t>(total));
    dataset.split.resize(static_cast<std::size_t>(total));

    Eigen::Index cursor = 0;
    const auto append = [&](const RawImages& raw, const std::vector<std::size_t>& rows,
                            double label, std::uint8_t split_tag) {
        for (const std::size_t row : rows) {
            const std::array<double, 16> angles = preprocess_image(raw.pixels[row]);
            for (int j = 0; j < 16; ++j) {
                dataset.features(cursor, j) = angles[static_cast<std::size_t>(j)];
            }
            dataset.labels(cursor) = label;
            dataset.ids[static_cast<std::size_t>(cursor)] = static_cast<std::int64_t>(row);
            dataset.split[static_cast<std::size_t>(cursor)] = split_tag;
            ++cursor;
        }
    };

    append(train_raw, pick_rows(train_raw, class_a, train_per_class, 1), 0.0, 0);
    append(train_raw, pick_rows(train_raw, class_b, train_per_class, 1), 1.0, 0);
    append(test_raw, pick_rows(test_raw, class_a, test_per_class, 2), 0.0, 1);
    append(test_raw, pick_rows(test_raw, class_b, test_per_class, 2), 1.0, 1);
    return dataset;
}

}  // namespace postvar
