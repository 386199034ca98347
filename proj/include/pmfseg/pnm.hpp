#pragma once

#include <string>

#include "pmfseg/image.hpp"

namespace pmfseg {

// Binary PPM (P6) for RGB images, binary PGM (P5) for masks and gray maps.
// Masks use 0 = background, 255 = foreground on disk.

Image read_ppm(const std::string& path);
void write_ppm(const Image& img, const std::string& path);

BinaryMask read_mask_pgm(const std::string& path);
void write_mask_pgm(const BinaryMask& mask, const std::string& path);

// Gray map in [0,1] written as 8-bit PGM (values scaled by 255).
void write_gray_pgm(const std::vector<double>& values, int width, int height,
                    const std::string& path);

}  // namespace pmfseg
