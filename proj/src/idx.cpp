#include "saddlecl/idx.hpp"

#include <fstream>

namespace saddlecl {

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t at) {
    if (at + 4 > bytes.size()) {
        throw format_error("idx: truncated header, need " + std::to_string(at + 4) + " bytes, have " +
                           std::to_string(bytes.size()));
    }
    return (std::uint32_t(bytes[at]) << 24) | (std::uint32_t(bytes[at + 1]) << 16) |
           (std::uint32_t(bytes[at + 2]) << 8) | std::uint32_t(bytes[at + 3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void check_payload(std::size_t declared, std::size_t have, std::size_t header) {
    if (have < header + declared) {
        throw format_error("idx: truncated payload, expected " + std::to_string(header + declared) +
                           " bytes, got " + std::to_string(have));
    }
}

}  // namespace

IdxContent parse_idx(const std::vector<std::uint8_t>& bytes) {
    const std::uint32_t magic = read_be32(bytes, 0);
    IdxContent out;
    if (magic == kIdxImagesMagic) {
        const std::size_t n = read_be32(bytes, 4);
        const std::size_t rows = read_be32(bytes, 8);
        const std::size_t cols = read_be32(bytes, 12);
        check_payload(n * rows * cols, bytes.size(), 16);
        out.is_images = true;
        out.rows = static_cast<int>(rows);
        out.cols = static_cast<int>(cols);
        out.images.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows * cols));
        std::size_t at = 16;
        for (Eigen::Index s = 0; s < out.images.rows(); ++s)
            for (Eigen::Index j = 0; j < out.images.cols(); ++j)
                out.images(s, j) = static_cast<double>(bytes[at++]) / 255.0;
    } else if (magic == kIdxLabelsMagic) {
        const std::size_t n = read_be32(bytes, 4);
        check_payload(n, bytes.size(), 8);
        out.is_images = false;
        out.labels.resize(n);
        for (std::size_t s = 0; s < n; ++s) out.labels[s] = static_cast<int>(bytes[8 + s]);
    } else {
        char hex[16];
        std::snprintf(hex, sizeof hex, "0x%08x", magic);
        throw format_error(std::string("idx: bad magic ") + hex + ", expected 0x00000803 (images) or 0x00000801 (labels)");
    }
    return out;
}

std::vector<std::uint8_t> serialize_idx_images(const std::vector<std::uint8_t>& pixels, int n, int rows,
                                               int cols) {
    require(n >= 0 && rows > 0 && cols > 0, "serialize_idx_images: bad dimensions");
    require(pixels.size() == static_cast<std::size_t>(n) * rows * cols,
            "serialize_idx_images: pixel count does not match n*rows*cols");
    std::vector<std::uint8_t> out;
    out.reserve(16 + pixels.size());
    write_be32(out, kIdxImagesMagic);
    write_be32(out, static_cast<std::uint32_t>(n));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    write_be32(out, kIdxLabelsMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

IdxContent load_idx(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("idx: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_idx(bytes);
}

}  // namespace saddlecl
