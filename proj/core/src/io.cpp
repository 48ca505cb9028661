#include "aream/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "ATSR serialization assumes a little-endian host");

namespace aream {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'S', 'R'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kDtypeFloat64 = 1;
constexpr std::uint8_t kDtypeUint8 = 2;

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TensorIoError("cannot open for writing: " + path.string());
    return out;
}

std::vector<char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TensorIoError("cannot open for reading: " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    return bytes;
}

void write_header(std::ofstream& out, std::uint8_t dtype,
                  const std::vector<std::size_t>& shape) {
    out.write(kMagic, 4);
    const std::uint8_t head[4] = {kVersion, dtype, static_cast<std::uint8_t>(shape.size()), 0};
    out.write(reinterpret_cast<const char*>(head), 4);
    for (std::size_t e : shape) {
        const std::uint64_t extent = e;
        out.write(reinterpret_cast<const char*>(&extent), 8);
    }
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    if (!t.all_finite()) {
        throw NonFinitePayloadError(path.string());
    }
    auto out = open_out(path);
    write_header(out, kDtypeFloat64, t.shape());
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) throw TensorIoError("write failed: " + path.string());
}

void write_tensor_u8(const std::filesystem::path& path,
                     const std::vector<std::size_t>& shape,
                     const std::vector<std::uint8_t>& data) {
    std::size_t expected = 1;
    for (std::size_t e : shape) expected *= e;
    if (data.size() != expected) {
        throw TensorIoError("write_tensor_u8: payload length does not match shape");
    }
    auto out = open_out(path);
    write_header(out, kDtypeUint8, shape);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw TensorIoError("write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    const std::vector<char> bytes = slurp(path);
    if (bytes.size() < 8) {
        if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0) {
            throw BadMagicError(path.string());
        }
        throw TruncatedPayloadError(path.string());
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw BadMagicError(path.string());
    const std::uint8_t version = static_cast<std::uint8_t>(bytes[4]);
    const std::uint8_t dtype = static_cast<std::uint8_t>(bytes[5]);
    const std::uint8_t ndim = static_cast<std::uint8_t>(bytes[6]);
    if (version != kVersion) throw BadVersionError(path.string(), version);
    if (dtype != kDtypeFloat64 && dtype != kDtypeUint8) {
        throw BadDtypeError(path.string(), dtype);
    }

    std::size_t offset = 8;
    if (bytes.size() < offset + 8ull * ndim) throw TruncatedPayloadError(path.string());
    std::vector<std::size_t> shape(ndim);
    std::size_t count = 1;
    for (std::size_t a = 0; a < ndim; ++a) {
        std::uint64_t extent;
        std::memcpy(&extent, bytes.data() + offset, 8);
        offset += 8;
        shape[a] = static_cast<std::size_t>(extent);
        count *= shape[a];
    }

    const std::size_t elem = dtype == kDtypeFloat64 ? sizeof(double) : 1;
    if (bytes.size() != offset + count * elem) throw TruncatedPayloadError(path.string());

    std::vector<double> data(count);
    if (dtype == kDtypeFloat64) {
        std::memcpy(data.data(), bytes.data() + offset, count * sizeof(double));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            data[i] = static_cast<double>(static_cast<std::uint8_t>(bytes[offset + i]));
        }
    }
    Tensor t = Tensor::from_data(std::move(shape), std::move(data));
    if (!t.all_finite()) throw NonFinitePayloadError(path.string());
    return t;
}

void write_label_map(const std::filesystem::path& path, const LabelMap& map) {
    auto out = open_out(path);
    out << "P5\n" << map.width << " " << map.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(map.values.data()),
              static_cast<std::streamsize>(map.values.size()));
    if (!out) throw TensorIoError("write failed: " + path.string());
}

LabelMap read_label_map(const std::filesystem::path& path) {
    const std::vector<char> bytes = slurp(path);
    // Header: "P5" then whitespace-separated width, height, maxval, then a
    // single whitespace byte before the raster.
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size() &&
               (bytes[pos] == ' ' || bytes[pos] == '\t' || bytes[pos] == '\n' ||
                bytes[pos] == '\r')) {
            ++pos;
        }
    };
    auto read_int = [&]() -> std::size_t {
        skip_space();
        std::size_t v = 0;
        bool any = false;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) throw TensorIoError("malformed PGM header: " + path.string());
        return v;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw TensorIoError("not a P5 graymap: " + path.string());
    }
    pos = 2;
    const std::size_t width = read_int();
    const std::size_t height = read_int();
    const std::size_t maxval = read_int();
    if (maxval != 255) throw TensorIoError("PGM maxval must be 255: " + path.string());
    ++pos;  // single whitespace separating header and raster

    if (bytes.size() != pos + width * height) {
        throw TensorIoError("PGM raster size mismatch: " + path.string());
    }
    LabelMap map(height, width);
    std::memcpy(map.values.data(), bytes.data() + pos, width * height);
    return map;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
    if (!out) throw TensorIoError("write failed: " + path.string());
}

}  // namespace aream
