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

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace postvar {

/// Rows are data points; labels are real for regression and small integers
/// for classification.  `split` tags rows 0 = train / 1 = test and may be
/// empty, which means everything is training data.
struct Dataset {
    Eigen::MatrixXd features;  // d x l
    Eigen::VectorXd labels;    // d
    std::vector<std::int64_t> ids;
    std::vector<std::uint8_t> split;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index feature_count() const { return features.cols(); }

    std::vector<Eigen::Index> train_rows() const;
    std::vector<Eigen::Index> test_rows() const;
};

/// Row subset (copies), keeping ids; split tags are dropped.
Dataset dataset_subset(const Dataset& dataset, std::span<const Eigen::Index> rows);

/// Raw grayscale images as parsed from an IDX pair.
struct RawImages {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<std::uint8_t>> pixels;  // row-major per image
    std::vector<std::uint8_t> labels;
};

/// Reads a big-endian IDX image/label pair (magic 0x00000803 / 0x00000801).
/// Malformed input raises std::runtime_error naming the byte offset.
RawImages load_idx_images(const std::string& images_path, const std::string& labels_path);

/// Inverse of load_idx_images, byte-exact on round trip.
void write_idx_images(const std::string& images_path, const std::string& labels_path,
                      const RawImages& images);

/// 28x28 image -> 16 angles: max pooling over the sixteen disjoint 7x7
/// patches, flattened row-major, each value scaled by 2*pi/256 so the
/// result stays strictly below 2*pi.
std::array<double, 16> preprocess_image(std::span<const std::uint8_t> pixels);

enum class SynthKind { kBlobs, kParity, kLinear };

SynthKind synth_kind_from_string(const std::string& name);
std::string to_string(SynthKind kind);

/// Knobs for the synthetic generators.  `qubits` fixes the row structure
/// the downstream encoder will use (feature r*n+j lands on qubit j in
/// encoding row r); generators avoid planting signal in encoding row 0,
/// whose RZ layer acts on |0...0> only up to a global phase.
struct SynthParams {
    int count = 100;
    int feature_count = 16;
    int qubits = 4;
    double noise = 0.15;        // blobs: gaussian feature jitter
    double label_noise = 0.0;   // linear: gaussian label noise
    double low = 0.0;           // linear feature range / parity low angle
    double high = 0.7853981633974483;  // pi/4
};

struct SynthDataset {
    Dataset dataset;
    Eigen::VectorXd planted_weights;  // linear kind only, empty otherwise
};

/// Deterministic given (kind, params, seed).  Classification kinds keep
/// the class counts balanced to within one sample.
SynthDataset synth_dataset(SynthKind kind, const SynthParams& params, std::uint64_t seed);

/// CSV export `id,label,f0..f{l-1}`; `extra_header` lines (if any) are
/// emitted first as `# `-prefixed comments.
void write_dataset_csv(std::ostream& out, const Dataset& dataset,
                       std::span<const std::string> extra_header = {});

Dataset read_dataset_csv(std::istream& in);

/// Fashion-MNIST label ids for the binary task studied here.
inline constexpr int kFashionCoat = 4;
inline constexpr int kFashionShirt = 6;

/// Builds the coat-vs-shirt subset from a directory holding the standard
/// IDX files (train-images-idx3-ubyte etc.).  Rows are drawn per class by
/// a seed-driven shuffle of the file order; train rows come from the train
/// pair and test rows from the t10k pair.  Labels: first class -> 0,
/// second class -> 1.  Features are preprocessed to the 16-angle form.
Dataset load_fashion_binary(const std::string& directory, int class_a, int class_b,
                            int train_per_class, int test_per_class,
                            std::uint64_t seed);

}  // namespace postvar
