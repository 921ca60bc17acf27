#pragma once

// Ground-truth image model: objects, separated placements, the shifted grid of
// w' x w' cells, per-cell feature vectors and the noise budget.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "locsketch/image.hpp"
#include "locsketch/rng.hpp"

namespace locsketch {

struct ModelConfig {
    std::size_t n = 0;        // image side; N = number of grid cells
    std::size_t w = 0;        // object box side
    std::size_t w_prime = 0;  // cell side
    std::size_t k = 0;        // object count
    double alpha = 0.0005;
    double gamma = 0.0005;

    /// Throws std::invalid_argument on w = 0, w' < w or w > n.
    void validate() const;
};

/// A w x w non-negative pixel block.
class ObjectTemplate {
public:
    /// Throws std::invalid_argument unless `pixels` is square and non-negative.
    explicit ObjectTemplate(Image pixels);

    const Image& pixels() const { return pixels_; }
    std::size_t side() const { return pixels_.rows(); }
    double mass() const { return pixels_.sum(); }

private:
    Image pixels_;
};

/// `count` copies of one separable tent-shaped w x w profile with total
/// masses first_mass, first_mass + mass_step, ...
std::vector<ObjectTemplate> scaled_templates(std::size_t w, std::size_t count, double first_mass,
                                             double mass_step);

/// Top-left corner of an object box.
struct Translation {
    std::size_t x = 0;
    std::size_t y = 0;
    friend bool operator==(const Translation&, const Translation&) = default;
};

struct Placement {
    std::vector<Translation> translations;

    /// Pairwise Chebyshev separation of at least `min_separation`.
    bool is_valid(std::size_t min_separation) const;
};

/// Rejection-sample k translations in [0, n-w]^2 that are pairwise at least
/// w' apart in the max norm. Throws std::runtime_error when the image cannot
/// hold them after bounded retries.
Placement place_objects(Rng& rng, const ModelConfig& config, std::size_t count);

/// x = sum of templates[i] translated by placement[i].
Image render(const ModelConfig& config, std::span<const ObjectTemplate> templates,
             const Placement& placement);

// ---------------------------------------------------------------------------

/// Mass and mass-weighted centroid in cell-local pixel indices. The centroid
/// is (0, 0) when the mass is exactly zero.
struct FeatureVector {
    double mass = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureNorm {
    double mass_scale = 1.0;
    double centroid_scale = 1.0;

    /// Throws std::invalid_argument unless both scales are positive and finite.
    void validate() const;

    /// Distance of f from the empty feature: |mass| / mass_scale.
    double magnitude(const FeatureVector& f) const;
};

/// mass_scale = median template mass, centroid_scale = w / 2.
FeatureNorm default_norm(std::span<const ObjectTemplate> templates);

/// Feature of a side x side block stored row-major in `cell`.
FeatureVector feature(std::span<const double> cell, std::size_t side);
FeatureVector feature(const Image& cell);

/// Weighted max-norm of (dmass, dcx, dcy). Zero when both masses are zero,
/// +infinity when exactly one is.
double feature_distance(const FeatureVector& a, const FeatureVector& b, const FeatureNorm& norm);

/// Minimum pairwise distance among the templates placed at the top-left of an
/// empty w' x w' cell, and their distance from the empty cell (magnitude).
double distinguishability_threshold(std::span<const ObjectTemplate> templates, std::size_t w_prime,
                                    const FeatureNorm& norm);

// ---------------------------------------------------------------------------

/// A grid of w' x w' cells laid over the image after shifting it by v, i.e.
/// pixel (x, y) sits at padded coordinate (x + vx, y + vy). The padded image
/// has cells_per_axis * w' pixels per side and is zero outside the image, so
/// every pixel belongs to exactly one complete cell. The cell count does not
/// depend on v.
struct GridView {
    std::size_t n = 0;
    std::size_t w_prime = 0;
    std::size_t vx = 0;
    std::size_t vy = 0;

    /// Cells that fully contain / intersect some object box; filled only by
    /// classification with a known placement.
    std::vector<std::uint64_t> full_cells;
    std::vector<std::uint64_t> touched_cells;

    static GridView make(std::size_t n, std::size_t w_prime, std::size_t vx, std::size_t vy);

    std::size_t cells_per_axis() const { return (n + 2 * w_prime - 2) / w_prime; }
    std::uint64_t cell_count() const { return static_cast<std::uint64_t>(cells_per_axis()) * cells_per_axis(); }

    std::uint64_t cell_of(std::size_t x, std::size_t y) const;
    /// Row-major offset of pixel (x, y) inside its cell.
    std::size_t local_offset(std::size_t x, std::size_t y) const;

    /// Copy of one cell's pixels (zero where the cell leaves the image).
    Image extract(const Image& image, std::uint64_t cell) const;
    /// All cells, indexed by cell number.
    std::vector<Image> split(const Image& image) const;
    /// Inverse of split: the padded image, cells_per_axis * w' pixels per side.
    Image assemble_padded(std::span<const Image> cells) const;
};

/// Sample v uniformly from [w']^2.
GridView sample_grid(Rng& rng, std::size_t n, std::size_t w_prime);

/// Fill full_cells / touched_cells from the object boxes of `placement`.
void classify_cells(GridView& grid, const Placement& placement, std::size_t w);

/// sample_grid followed by classify_cells.
GridView impose_grid(Rng& rng, const ModelConfig& config, const Placement& placement);

// ---------------------------------------------------------------------------

struct NoiseSpec {
    double sigma = 0.0;    // per-pixel Gaussian standard deviation
    bool poisson = false;  // resample each pixel as Poisson(x) first
};

struct NoisyImage {
    Image observed;  // x' = x + mu
    Image noise;     // mu
};

/// Throws std::invalid_argument when Poisson is requested on a negative pixel.
NoisyImage add_noise(Rng& rng, const Image& x, const NoiseSpec& spec);

/// ||mu||_F = sum over cells of the magnitude of the noise restricted to the cell.
double noise_budget(const GridView& grid, const Image& noise, const FeatureNorm& norm);

}  // namespace locsketch
