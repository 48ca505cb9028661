#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "aream/labels.hpp"
#include "aream/tensor.hpp"

namespace aream {

// Binary tensor container:
//   bytes 0..3   magic "ATSR"
//   byte  4      version, currently 1
//   byte  5      dtype, 1 = float64, 2 = uint8
//   byte  6      ndim
//   byte  7      reserved, must be 0
//   then ndim little-endian uint64 extents, then the row-major payload in
//   little-endian element order.
// Reads and writes are bit-exact round trips.

struct TensorIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagicError : TensorIoError {
    explicit BadMagicError(const std::string& path)
        : TensorIoError("bad magic (not an ATSR tensor file): " + path) {}
};
struct BadVersionError : TensorIoError {
    BadVersionError(const std::string& path, int version)
        : TensorIoError("unsupported ATSR version " + std::to_string(version) + ": " + path) {}
};
struct BadDtypeError : TensorIoError {
    BadDtypeError(const std::string& path, int dtype)
        : TensorIoError("unknown ATSR dtype code " + std::to_string(dtype) + ": " + path) {}
};
struct TruncatedPayloadError : TensorIoError {
    explicit TruncatedPayloadError(const std::string& path)
        : TensorIoError("truncated ATSR payload: " + path) {}
};
struct NonFinitePayloadError : TensorIoError {
    explicit NonFinitePayloadError(const std::string& path)
        : TensorIoError("ATSR payload contains NaN or Inf: " + path) {}
};

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

// uint8 payloads (dtype 2); values widen to doubles on the generic read path.
void write_tensor_u8(const std::filesystem::path& path,
                     const std::vector<std::size_t>& shape,
                     const std::vector<std::uint8_t>& data);

// Label maps travel as binary portable graymaps (P5, maxval 255); the gray
// value is the class index, 255 the ignore label.
void write_label_map(const std::filesystem::path& path, const LabelMap& map);
LabelMap read_label_map(const std::filesystem::path& path);

// Whole-file text helpers for reports and manifests.
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace aream
