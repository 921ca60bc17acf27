#pragma once

// Synthetic sky, catalog subset and pair database, star identification by
// triangles plus a fourth star, and the fold/recover/identify experiment.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locsketch/aduaf.hpp"
#include "locsketch/image.hpp"
#include "locsketch/rng.hpp"

namespace locsketch {

/// Positions live on the rectangle ra in [-pi, pi], dec in [-pi/2, pi/2]
/// and distances are Euclidean there.
struct Star {
    std::uint32_t id = 0;
    double ra = 0.0;
    double dec = 0.0;
    double mass = 0.0;
};

struct StarCatalog {
    std::vector<Star> stars;
};

/// CSV with header ra,dec,mass. Ids are assigned by row order. Throws
/// std::runtime_error naming the offending line on parse or range errors.
StarCatalog read_catalog_csv(std::istream& in);
StarCatalog load_catalog(const std::string& path);
void write_catalog_csv(std::ostream& out, const StarCatalog& catalog);

/// The j-th star (1-based) has mass j^exponent; positions are uniform on the
/// rectangle.
StarCatalog generate_catalog(Rng& rng, std::size_t count, double exponent = -1.17);

/// Union over every star's radius-ball of the top_m most massive stars in it.
/// Ties in mass go to the lower id. Order follows the input.
StarCatalog build_subset(const StarCatalog& catalog, double radius, std::size_t top_m);

double separation(const Star& a, const Star& b);

struct CatalogPair {
    std::uint32_t a = 0;  // indices into the database catalog
    std::uint32_t b = 0;
    double separation = 0.0;
};

struct Neighbor {
    std::uint32_t star = 0;
    double separation = 0.0;
};

class PairDatabase {
public:
    /// All unordered pairs with separation < max_separation.
    PairDatabase(StarCatalog catalog, double max_separation);

    const StarCatalog& catalog() const { return catalog_; }
    double max_separation() const { return max_separation_; }
    std::span<const CatalogPair> pairs() const { return pairs_; }

    /// Pairs with lo <= separation <= hi.
    std::span<const CatalogPair> in_range(double lo, double hi) const;
    /// Neighbours of one star, ascending separation.
    std::span<const Neighbor> neighbors(std::uint32_t star) const;
    /// Neighbours whose separation lies in [lo, hi].
    std::span<const Neighbor> neighbors_in_range(std::uint32_t star, double lo, double hi) const;

    double separation(std::uint32_t a, std::uint32_t b) const;

private:
    StarCatalog catalog_;
    double max_separation_;
    std::vector<CatalogPair> pairs_;
    std::vector<std::size_t> neighbor_offsets_;
    std::vector<Neighbor> neighbors_;
};

/// Pairs that can share a fov x fov frame: separation < fov * sqrt(2).
PairDatabase build_pair_db(const StarCatalog& subset, double fov);

// ---------------------------------------------------------------------------

struct PatchConfig {
    double fov = 0.08;
    std::size_t n = 800;
    double noise_sigma = 0.0;     // Gaussian per frame pixel
    bool poisson = true;          // photon shot noise per frame pixel
    double psf_sigma = 0.5;       // Gaussian PSF width, pixels
    double photon_scale = 1.0;    // photons per unit catalog mass
    double declination_cut = std::numbers::pi / 2 - std::numbers::pi / 8;

    void validate() const;
    double pixel_scale() const { return fov / static_cast<double>(n); }
};

/// A star rendered into a frame; pixel i covers [i, i + 1).
struct PlacedStar {
    std::uint32_t id = 0;
    double x = 0.0;
    double y = 0.0;
    double photons = 0.0;
};

struct SkyPatch {
    double ra0 = 0.0;  // frame centre
    double dec0 = 0.0;
    Image clean;
    Image observed;
    std::vector<PlacedStar> stars;  // centres inside the frame
};

/// Frame row follows right ascension and frame column declination.
PlacedStar project(const Star& star, double ra0, double dec0, const PatchConfig& config);

/// Render every star of `catalog` near a frame centred at (ra0, dec0) with a
/// pixel-integrated Gaussian PSF, then apply the configured noise.
SkyPatch render_patch(Rng& rng, const StarCatalog& catalog, double ra0, double dec0, const PatchConfig& config);

/// Centre uniform with |dec0| <= declination_cut and the frame inside the
/// ra range, then render_patch.
SkyPatch simulate_patch(Rng& rng, const StarCatalog& catalog, const PatchConfig& config);

/// Photon scale that maps the median catalog mass to `photons`.
double photon_scale_for_median(const StarCatalog& catalog, double photons);

// ---------------------------------------------------------------------------

struct Centroid {
    double x = 0.0;
    double y = 0.0;
    double mass = 0.0;
};

struct IdentifyOptions {
    double tolerance = 1.5 * 0.0001;  // radians
    double pixel_scale = 0.0001;      // radians per pixel
    unsigned min_match_stars = 4;     // 3 accepts a lone triangle
    std::size_t max_centroids = 10;   // brightest centroids examined
};

enum class IdentifyStatus { Matched, NotEnoughStars, NoMatch };

struct IdentificationResult {
    IdentifyStatus status = IdentifyStatus::NoMatch;
    std::vector<std::size_t> centroids;  // indices into the input
    std::vector<std::uint32_t> stars;    // indices into the database catalog
    std::vector<std::uint32_t> ids;      // catalog ids of those stars

    bool matched() const { return status == IdentifyStatus::Matched; }
};

std::string to_string(IdentifyStatus status);

/// Triangles of centroids checked against database edges within tolerance,
/// then extended by a fourth star that fits all three edges to it.
IdentificationResult identify(std::span<const Centroid> centroids, const PairDatabase& db,
                              const IdentifyOptions& options);

/// Every pairwise centroid distance of the match agrees with the catalog
/// separation within tolerance, and every pair is in the database.
bool match_is_consistent(const IdentificationResult& result, std::span<const Centroid> centroids,
                         const PairDatabase& db, const IdentifyOptions& options);

// ---------------------------------------------------------------------------

struct ExperimentConfig {
    PatchConfig patch;
    std::vector<double> sigmas{0.0, 50.0, 100.0, 150.0};
    std::vector<std::pair<std::size_t, std::size_t>> prime_pairs{{29, 31}};
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    AduafConfig aduaf;
    double match_tolerance_px = 1.5;
    unsigned min_match_stars = 4;
    double truth_radius_px = 2.0;  // a matched centroid must sit this close to its star
    unsigned jobs = 1;
    bool timing = false;
};

struct ExperimentRow {
    double sigma = 0.0;
    std::size_t p1 = 0;
    std::size_t p2 = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::optional<double> mean_runtime;  // seconds per fold+recover+identify, when timed
};

/// One row per (prime pair, sigma). Each trial draws one sky patch (with
/// photon noise) shared by all grid points; the Gaussian fold noise of a
/// trial is one standard-normal field per prime pair scaled by sigma.
std::vector<ExperimentRow> run_experiment(const StarCatalog& catalog, const PairDatabase& db,
                                          const ExperimentConfig& config);

/// sigma,p1,p2,trials,successes,mean_runtime
void write_experiment_csv(std::ostream& out, std::span<const ExperimentRow> rows);

/// Fold, add Gaussian noise, recover, identify, and check against the truth.
/// `noise1`/`noise2` are standard-normal fields of size p1^2 and p2^2.
bool run_trial(const SkyPatch& patch, const PairDatabase& db, const ExperimentConfig& config, std::size_t p1,
               std::size_t p2, double sigma, std::span<const double> noise1, std::span<const double> noise2);

}  // namespace locsketch
