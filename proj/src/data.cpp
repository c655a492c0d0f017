#include "asnn/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "asnn/errors.hpp"
#include "asnn/rng.hpp"

namespace asnn {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;  // idx3: unsigned byte, 3 dims
constexpr std::uint32_t kLabelMagic = 0x00000801;  // idx1: unsigned byte, 1 dim

// gzFile reads both gzip-compressed and plain files transparently.
class IdxReader {
public:
    explicit IdxReader(const std::string& path) : path_(path) {
        file_ = gzopen(path.c_str(), "rb");
        if (file_ == nullptr) throw DataError("cannot open " + path);
    }
    ~IdxReader() {
        if (file_ != nullptr) gzclose(file_);
    }
    IdxReader(const IdxReader&) = delete;
    IdxReader& operator=(const IdxReader&) = delete;

    std::uint32_t read_u32_be() {
        unsigned char bytes[4];
        read_exact(bytes, 4);
        return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
               (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
    }

    void read_exact(void* out, std::size_t n) {
        const int got = gzread(file_, out, static_cast<unsigned>(n));
        if (got < 0 || static_cast<std::size_t>(got) != n) {
            throw DataError("truncated file: " + path_);
        }
    }

private:
    std::string path_;
    gzFile file_ = nullptr;
};

Matrix read_idx_images(const std::string& path) {
    IdxReader reader(path);
    const std::uint32_t magic = reader.read_u32_be();
    if (magic != kImageMagic) {
        throw DataError(path + ": wrong magic number for an image file");
    }
    const std::uint32_t count = reader.read_u32_be();
    const std::uint32_t rows = reader.read_u32_be();
    const std::uint32_t cols = reader.read_u32_be();
    const std::size_t pixels = std::size_t(rows) * cols;
    if (count == 0 || pixels == 0) throw DataError(path + ": empty image file");

    Matrix images(count, pixels);
    std::vector<unsigned char> buffer(pixels);
    for (std::uint32_t i = 0; i < count; ++i) {
        reader.read_exact(buffer.data(), pixels);
        double* row = images.row_ptr(i);
        for (std::size_t j = 0; j < pixels; ++j) {
            row[j] = static_cast<double>(buffer[j]) / 255.0;
        }
    }
    return images;
}

std::vector<std::size_t> read_idx_labels(const std::string& path) {
    IdxReader reader(path);
    const std::uint32_t magic = reader.read_u32_be();
    if (magic != kLabelMagic) {
        throw DataError(path + ": wrong magic number for a label file");
    }
    const std::uint32_t count = reader.read_u32_be();
    if (count == 0) throw DataError(path + ": empty label file");

    std::vector<unsigned char> buffer(count);
    reader.read_exact(buffer.data(), count);
    std::vector<std::size_t> labels(count);
    for (std::uint32_t i = 0; i < count; ++i) labels[i] = buffer[i];
    return labels;
}

std::string pick_existing(const std::string& dir, const std::string& base) {
    namespace fs = std::filesystem;
    const std::string plain = dir + "/" + base;
    if (fs::exists(plain)) return plain;
    const std::string gz = plain + ".gz";
    if (fs::exists(gz)) return gz;
    throw DataError("missing MNIST file: " + plain + "[.gz]");
}

}  // namespace

MnistPaths mnist_paths_in_dir(const std::string& dir) {
    MnistPaths paths;
    paths.train_images = pick_existing(dir, "train-images-idx3-ubyte");
    paths.train_labels = pick_existing(dir, "train-labels-idx1-ubyte");
    paths.test_images = pick_existing(dir, "t10k-images-idx3-ubyte");
    paths.test_labels = pick_existing(dir, "t10k-labels-idx1-ubyte");
    return paths;
}

LabeledDataset load_mnist_idx(const MnistPaths& paths) {
    LabeledDataset data;
    data.train_inputs = read_idx_images(paths.train_images);
    data.train_labels = read_idx_labels(paths.train_labels);
    data.test_inputs = read_idx_images(paths.test_images);
    data.test_labels = read_idx_labels(paths.test_labels);

    if (data.train_inputs.rows != data.train_labels.size()) {
        throw DataError("train image/label counts do not match");
    }
    if (data.test_inputs.rows != data.test_labels.size()) {
        throw DataError("test image/label counts do not match");
    }
    if (data.train_inputs.cols != data.test_inputs.cols) {
        throw DataError("train and test image sizes differ");
    }

    data.input_dim = data.train_inputs.cols;
    std::size_t max_label = 0;
    for (std::size_t l : data.train_labels) max_label = std::max(max_label, l);
    for (std::size_t l : data.test_labels) max_label = std::max(max_label, l);
    data.num_classes = max_label + 1;
    data.name = "mnist";
    return data;
}

namespace {

void fill_split(Matrix& inputs, std::vector<std::size_t>& labels, std::size_t n,
                const SyntheticSpec& spec, Xoshiro256pp& rng) {
    inputs = Matrix(n, spec.dim);
    labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i % spec.classes;
    shuffle_in_place(labels, rng);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = inputs.row_ptr(i);
        for (std::size_t j = 0; j < spec.dim; ++j) row[j] = rng.normal();
        row[labels[i] % spec.dim] += spec.margin;
    }
}

}  // namespace

LabeledDataset make_synthetic(std::uint64_t seed, const SyntheticSpec& spec) {
    if (spec.classes < 2) throw std::invalid_argument("make_synthetic: classes must be >= 2");
    if (spec.dim == 0) throw std::invalid_argument("make_synthetic: dim must be >= 1");
    if (spec.n_train == 0) throw std::invalid_argument("make_synthetic: n_train must be >= 1");
    if (spec.n_test == 0) throw std::invalid_argument("make_synthetic: n_test must be >= 1");

    LabeledDataset data;
    Xoshiro256pp train_rng(mix_seed(seed, 0x7a1));
    Xoshiro256pp test_rng(mix_seed(seed, 0x7e5));
    fill_split(data.train_inputs, data.train_labels, spec.n_train, spec, train_rng);
    fill_split(data.test_inputs, data.test_labels, spec.n_test, spec, test_rng);
    data.input_dim = spec.dim;
    data.num_classes = spec.classes;
    data.name = "synthetic";
    return data;
}

}  // namespace asnn
