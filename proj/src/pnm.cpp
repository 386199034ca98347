#include "pmfseg/pnm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pmfseg {

namespace {

void skip_pnm_whitespace(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            in.get();
        } else {
            return;
        }
    }
}

int read_pnm_int(std::istream& in, const std::string& path) {
    skip_pnm_whitespace(in);
    int v = -1;
    in >> v;
    if (!in || v < 0) throw std::runtime_error("bad PNM header in " + path);
    return v;
}

uint8_t to_byte(float v) {
    double x = std::lround(static_cast<double>(v) * 255.0);
    return static_cast<uint8_t>(std::clamp(x, 0.0, 255.0));
}

}  // namespace

Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P6") throw std::runtime_error(path + ": expected binary PPM (P6)");
    const int w = read_pnm_int(in, path);
    const int h = read_pnm_int(in, path);
    const int maxval = read_pnm_int(in, path);
    if (maxval != 255) throw std::runtime_error(path + ": only maxval 255 supported");
    in.get();  // single whitespace after header
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw std::runtime_error(path + ": truncated pixel data");
    Image img(w, h);
    for (size_t i = 0; i < raw.size(); ++i) img.data()[i] = raw[i] / 255.0f;
    return img;
}

void write_ppm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<uint8_t> raw(img.data().size());
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = to_byte(img.data()[i]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

BinaryMask read_mask_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5") throw std::runtime_error(path + ": expected binary PGM (P5)");
    const int w = read_pnm_int(in, path);
    const int h = read_pnm_int(in, path);
    const int maxval = read_pnm_int(in, path);
    if (maxval != 255) throw std::runtime_error(path + ": only maxval 255 supported");
    in.get();
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw std::runtime_error(path + ": truncated pixel data");
    BinaryMask mask(w, h);
    for (size_t i = 0; i < raw.size(); ++i) mask.data()[i] = raw[i] > 127 ? 1 : 0;
    return mask;
}

void write_mask_pgm(const BinaryMask& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
    std::vector<uint8_t> raw(mask.data().size());
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = mask.data()[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

void write_gray_pgm(const std::vector<double>& values, int width, int height,
                    const std::string& path) {
    if (values.size() != static_cast<size_t>(width) * height)
        throw std::invalid_argument("write_gray_pgm: size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P5\n" << width << " " << height << "\n255\n";
    std::vector<uint8_t> raw(values.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        double x = std::lround(std::clamp(values[i], 0.0, 1.0) * 255.0);
        raw[i] = static_cast<uint8_t>(x);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace pmfseg
