#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pmfseg {

// RGB image on a pixel grid, channels in [0,1], row-major, interleaved.
class Image {
public:
    Image() = default;
    Image(int width, int height, float fill = 0.f)
        : width_(width), height_(height),
          data_(static_cast<size_t>(width) * height * 3, fill) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("Image: width and height must be >= 1");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int pixels() const { return width_ * height_; }

    float* at(int x, int y) { return data_.data() + 3 * (static_cast<size_t>(y) * width_ + x); }
    const float* at(int x, int y) const {
        return data_.data() + 3 * (static_cast<size_t>(y) * width_ + x);
    }
    float* at(int idx) { return data_.data() + 3 * static_cast<size_t>(idx); }
    const float* at(int idx) const { return data_.data() + 3 * static_cast<size_t>(idx); }

    void set(int x, int y, float r, float g, float b) {
        float* p = at(x, y);
        p[0] = r; p[1] = g; p[2] = b;
    }

    bool inside(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

// Binary foreground labeling; 1 = foreground, 0 = background.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, uint8_t fill = 0)
        : width_(width), height_(height),
          data_(static_cast<size_t>(width) * height, fill) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("BinaryMask: width and height must be >= 1");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int pixels() const { return width_ * height_; }

    uint8_t at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
    uint8_t at(int idx) const { return data_[idx]; }
    void set(int x, int y, uint8_t v) { data_[static_cast<size_t>(y) * width_ + x] = v; }
    void set(int idx, uint8_t v) { data_[idx] = v; }

    bool inside(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

    int foreground_count() const {
        int n = 0;
        for (uint8_t v : data_) n += (v != 0);
        return n;
    }

    bool empty_foreground() const { return foreground_count() == 0; }

    const std::vector<uint8_t>& data() const { return data_; }
    std::vector<uint8_t>& data() { return data_; }

    bool operator==(const BinaryMask& o) const {
        return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> data_;
};

struct BBox {
    int x = 0, y = 0, w = 0, h = 0;  // x,y = top-left corner (column, row)

    bool operator==(const BBox&) const = default;
};

// Tight bounding box of the foreground; throws on an empty mask.
inline BBox tight_bbox(const BinaryMask& m) {
    int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y)) {
                x0 = std::min(x0, x); y0 = std::min(y0, y);
                x1 = std::max(x1, x); y1 = std::max(y1, y);
            }
    if (x1 < 0) throw std::runtime_error("tight_bbox: empty mask");
    return BBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

inline double luma(const float* rgb) {
    return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
}

}  // namespace pmfseg
