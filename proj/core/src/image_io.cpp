#include "revive/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "revive/errors.hpp"

namespace revive::io {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::string& bytes) : b_(bytes) {}

    // Skips whitespace and '#' comments, then reads a decimal field.
    std::size_t number(const char* field) {
        skip();
        const std::size_t start = pos_;
        std::size_t value = 0;
        while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
            value = value * 10 + static_cast<std::size_t>(b_[pos_] - '0');
            if (value > 1'000'000) throw IoError(std::string("ppm: ") + field + " too large");
            ++pos_;
        }
        if (pos_ == start) throw IoError(std::string("ppm: malformed header, expected ") + field);
        return value;
    }

    void skip() {
        while (pos_ < b_.size()) {
            const char c = b_[pos_];
            if (c == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::size_t& pos() { return pos_; }

private:
    const std::string& b_;
    std::size_t pos_ = 0;
};

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Tensor decode_ppm(const std::string& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
        throw IoError("ppm: malformed header, missing P6 magic");
    }
    HeaderReader hr(bytes);
    hr.pos() = 2;
    const std::size_t w = hr.number("width");
    const std::size_t h = hr.number("height");
    const std::size_t maxval = hr.number("maxval");
    if (w == 0 || h == 0) throw IoError("ppm: malformed header, zero dimension");
    if (maxval != 255) throw IoError("ppm: unsupported maxval " + std::to_string(maxval));
    std::size_t& pos = hr.pos();
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw IoError("ppm: malformed header, missing separator before raster");
    }
    ++pos;
    if (bytes.size() - pos != w * h * 3) {
        throw IoError("ppm: raster has " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                      std::to_string(w * h * 3));
    }
    Tensor out(Shape{1, 3, h, w});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const auto byte = static_cast<unsigned char>(bytes[pos + (y * w + x) * 3 + c]);
                out.at(0, c, y, x) = byte / 255.0;
            }
        }
    }
    return out;
}

std::string encode_ppm(const Tensor& image) {
    const Shape s = image.shape();
    if (s.n != 1 || s.c != 3) throw ShapeError("ppm: expected a 1x3xHxW tensor, got " + to_string(s));
    std::string out = "P6\n" + std::to_string(s.w) + " " + std::to_string(s.h) + "\n255\n";
    out.reserve(out.size() + s.numel());
    for (std::size_t y = 0; y < s.h; ++y) {
        for (std::size_t x = 0; x < s.w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) out.push_back(static_cast<char>(to_byte(image.at(0, c, y, x))));
        }
    }
    return out;
}

Tensor load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_ppm(bytes);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_image(const std::filesystem::path& path, const Tensor& image) {
    const std::string bytes = encode_ppm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Tensor quantize8(const Tensor& image) {
    Tensor out = image.clone();
    for (double& v : out.mutable_data()) v = to_byte(v) / 255.0;
    return out;
}

}  // namespace revive::io
