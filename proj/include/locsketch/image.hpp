#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace locsketch {

/// Dense row-major image of doubles. Pixel (x, y) lives at x * cols + y, so
/// `x` is the first (row) index throughout the library.
class Image {
public:
    Image() = default;
    Image(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    explicit Image(std::size_t side, double fill = 0.0) : Image(side, side, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& at(std::size_t x, std::size_t y) { return data_[x * cols_ + y]; }
    double at(std::size_t x, std::size_t y) const { return data_[x * cols_ + y]; }

    std::span<double> pixels() { return data_; }
    std::span<const double> pixels() const { return data_; }

    double sum() const;

    Image& operator+=(const Image& other);
    friend Image operator+(Image a, const Image& b) { return a += b; }
    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Flat binary for square images: uint64 side n (little-endian), then n*n
/// IEEE-754 doubles in row-major order.
void write_image_binary(std::ostream& out, const Image& image);
Image read_image_binary(std::istream& in);
void save_image(const std::string& path, const Image& image);
Image load_image(const std::string& path);

/// One CSV row per image row, full round-trip precision.
void write_image_csv(std::ostream& out, const Image& image);

}  // namespace locsketch
