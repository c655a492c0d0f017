#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asnn/matrix.hpp"

namespace asnn {

struct LabeledDataset {
    Matrix train_inputs;
    std::vector<std::size_t> train_labels;
    Matrix test_inputs;
    std::vector<std::size_t> test_labels;
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    std::string name;
};

struct MnistPaths {
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;

    bool operator==(const MnistPaths&) const = default;
};

// Resolves the four canonical IDX file names inside a directory,
// preferring plain files and falling back to .gz.
MnistPaths mnist_paths_in_dir(const std::string& dir);

// Loads the IDX image/label files (plain or gzip-compressed). Pixels are
// scaled to [0,1] by dividing by 255 and images are flattened. Throws
// DataError on bad magic numbers, truncated files, or image/label count
// mismatches.
LabeledDataset load_mnist_idx(const MnistPaths& paths);

struct SyntheticSpec {
    std::size_t classes = 10;
    std::size_t dim = 64;
    std::size_t n_train = 12000;
    std::size_t n_test = 2000;
    double margin = 6.0;

    bool operator==(const SyntheticSpec&) const = default;
};

// Deterministic Gaussian-blob classification set: class c is centred at
// margin * e_{c mod dim} with unit spherical noise, labels balanced.
// With the default margin the classes are separable by a wide margin,
// so small MLPs reach high accuracy in a few epochs.
LabeledDataset make_synthetic(std::uint64_t seed, const SyntheticSpec& spec);

}  // namespace asnn
