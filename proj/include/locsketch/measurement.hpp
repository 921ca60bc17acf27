#pragma once

// The bucketed cell-sum sketch and the two-dimensional torus fold.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locsketch/codes.hpp"
#include "locsketch/image.hpp"
#include "locsketch/image_model.hpp"
#include "locsketch/rng.hpp"

namespace locsketch {

/// Small constants of the analysis. beta and delta are derived from alpha,
/// gamma and eta; the code must have distance at least distance_fraction() * s.
struct Constants {
    double alpha = 0.0005;
    double gamma = 0.0005;
    double eta = 0.0005;

    double beta() const { return 32.0 * eta * (1.0 + 16.0 * alpha) + 24.0 * gamma; }
    double delta() const { return beta() + 16.0 * alpha + 2.0 * gamma; }
    double distance_fraction() const { return 4.0 * (3.0 * delta() + beta()); }

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

struct PlanConfig {
    std::size_t n = 0;
    std::size_t w_prime = 1;
    std::size_t k = 0;
    CodeKind kind = CodeKind::Crt;
    Constants constants;
    double log_factor = 1.0;  // require k >= log_factor * ln N

    /// Explicit code parameters. When all three are absent they are derived
    /// from the constants: q = ceil(k / eta), r the least with q^r > 2N, and s
    /// the least with s - r >= distance_fraction * s.
    std::optional<std::uint64_t> q;
    std::optional<unsigned> s;
    std::optional<unsigned> r;
};

class MeasurementPlan {
public:
    MeasurementPlan(IndependentCode code, GridView grid);

    const IndependentCode& code() const { return code_; }
    const GridView& grid() const { return grid_; }
    std::size_t w_prime() const { return grid_.w_prime; }
    unsigned rows() const { return code_.s(); }
    std::uint64_t cells() const { return grid_.cell_count(); }

    const std::vector<std::uint64_t>& row_sizes() const { return code_.alphabet_sizes(); }
    /// First bucket of row i in the concatenated layout.
    std::uint64_t row_offset(unsigned i) const { return offsets_[i]; }
    std::uint64_t total_buckets() const { return offsets_.back(); }

    /// g(cell), cached.
    std::span<const Symbol> symbols(std::uint64_t cell) const;

private:
    IndependentCode code_;
    GridView grid_;
    std::vector<std::uint64_t> offsets_;
    std::vector<Symbol> table_;  // cells x s
};

/// Resolved code parameters before sampling; useful for reporting.
struct PlanParameters {
    std::uint64_t q = 0;
    unsigned s = 0;
    unsigned r = 0;
    bool derived = false;
};

/// Validate the constants and k against the configuration and settle q, s, r.
/// Throws std::invalid_argument naming the violated inequality.
PlanParameters resolve_plan_parameters(const PlanConfig& config);

/// Sample the code and the grid shift.
MeasurementPlan build_plan(const PlanConfig& config, Rng& rng);

/// Row-major concatenation of all buckets, each a w' x w' block.
class Sketch {
public:
    Sketch(std::size_t w_prime, std::vector<std::uint64_t> row_sizes);

    std::size_t w_prime() const { return w_prime_; }
    unsigned rows() const { return static_cast<unsigned>(row_sizes_.size()); }
    const std::vector<std::uint64_t>& row_sizes() const { return row_sizes_; }
    std::size_t bucket_pixels() const { return w_prime_ * w_prime_; }

    std::span<double> bucket(unsigned row, std::uint64_t j);
    std::span<const double> bucket(unsigned row, std::uint64_t j) const;

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    Sketch& operator+=(const Sketch& other);
    friend bool operator==(const Sketch&, const Sketch&) = default;

private:
    std::size_t w_prime_;
    std::vector<std::uint64_t> row_sizes_;
    std::vector<std::uint64_t> offsets_;
    std::vector<double> data_;
};

/// Bucket (i, j) is the pixel-wise sum of all cells c with g_i(c) = j.
/// Throws std::invalid_argument on an image of the wrong size.
Sketch measure(const MeasurementPlan& plan, const Image& image);

/// m = w'^2 * sum |B_i|.
std::uint64_t measurement_count(const MeasurementPlan& plan);

/// Binary: uint64 s, s uint64 row sizes, uint64 w', then doubles.
void write_sketch_binary(std::ostream& out, const Sketch& sketch);
Sketch read_sketch_binary(std::istream& in);

/// The sketch as a dense 0/1 matrix with one column per image pixel (x * n + y),
/// written as row-major CSV. Throws std::invalid_argument when N > max_cells.
void write_explicit_matrix(std::ostream& out, const MeasurementPlan& plan, std::uint64_t max_cells = 4096);

// ---------------------------------------------------------------------------

struct FoldPlan {
    std::size_t p1 = 0;
    std::size_t p2 = 0;

    /// Throws std::invalid_argument unless gcd(p1, p2) = 1 and p1 * p2 >= n.
    static FoldPlan make(std::size_t p1, std::size_t p2, std::size_t n);

    std::size_t modulus(int which) const;
};

/// z[j1, j2] = sum of image[c1, c2] over c1 = j1, c2 = j2 (mod p).
Image fold2d(const Image& image, std::size_t p);
Image fold2d(const Image& image, const FoldPlan& plan, int which);

/// p1^2 + p2^2.
std::uint64_t measurement_count(const FoldPlan& plan);

}  // namespace locsketch
