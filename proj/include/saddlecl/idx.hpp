#pragma once

#include "saddlecl/types.hpp"

#include <cstdint>
#include <filesystem>

namespace saddlecl {

// IDX binary format: 4-byte big-endian magic, big-endian dimension
// sizes, unsigned-byte payload. Magic 0x00000803 = images (n, rows,
// cols), 0x00000801 = labels (n).
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxContent {
    bool is_images = false;
    Matrix images;  // n x (rows*cols), pixel bytes scaled by 1/255
    Labels labels;
    int rows = 0;
    int cols = 0;
};

IdxContent parse_idx(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> serialize_idx_images(const std::vector<std::uint8_t>& pixels, int n, int rows,
                                               int cols);
std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels);

IdxContent load_idx(const std::filesystem::path& path);

}  // namespace saddlecl
