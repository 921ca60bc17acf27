#include "locsketch/image.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace locsketch {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

double Image::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

Image& Image::operator+=(const Image& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_) throw std::invalid_argument("image shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

void write_image_binary(std::ostream& out, const Image& image) {
    if (image.rows() != image.cols()) throw std::invalid_argument("binary images must be square");
    const std::uint64_t side = image.rows();
    out.write(reinterpret_cast<const char*>(&side), sizeof side);
    const auto px = image.pixels();
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size_bytes()));
    if (!out) throw std::runtime_error("failed writing image");
}

Image read_image_binary(std::istream& in) {
    std::uint64_t side = 0;
    in.read(reinterpret_cast<char*>(&side), sizeof side);
    if (!in) throw std::runtime_error("truncated image header");
    if (side == 0 || side > (std::uint64_t{1} << 16U)) throw std::runtime_error("implausible image side");
    Image image(side);
    auto px = image.pixels();
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size_bytes()));
    if (!in) throw std::runtime_error("truncated image payload");
    return image;
}

void save_image(const std::string& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_image_binary(out, image);
}

Image load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_image_binary(in);
}

void write_image_csv(std::ostream& out, const Image& image) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t x = 0; x < image.rows(); ++x) {
        for (std::size_t y = 0; y < image.cols(); ++y) {
            if (y) out << ',';
            out << image.at(x, y);
        }
        out << '\n';
    }
}

}  // namespace locsketch
