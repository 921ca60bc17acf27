#pragma once

// Two-fold specialization: pick heavy windows on each torus, pair them by
// feature similarity, and recover frame positions by CRT in each axis.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "locsketch/image.hpp"

namespace locsketch {

struct AduafConfig {
    std::size_t n = 800;
    std::size_t p1 = 26;
    std::size_t p2 = 31;
    std::size_t cell_w = 3;
    std::size_t cells_per_fold = 10;
    std::size_t max_pairs = 8;
    std::size_t overlap_limit = 4;
    double mass_tol = 0.25;      // relative mass difference
    double centroid_tol = 0.5;   // sub-pixel centroid difference, pixels
    double merge_radius = 1.5;   // recovered stars closer than this collapse to the heavier

    /// Throws std::invalid_argument unless gcd(p1, p2) = 1, p1 * p2 >= n and
    /// the window fits inside each fold.
    void validate() const;
};

/// A cell_w x cell_w window of a fold, wrapped toroidally.
struct PickedCell {
    int fold = 1;
    std::size_t top = 0;   // row of the window's first pixel
    std::size_t left = 0;  // column of the window's first pixel
    double mass = 0.0;
    /// Mass-weighted centroid in unwrapped fold coordinates, where pixel i
    /// covers [i, i + 1). May exceed p when the window wraps.
    double cx = 0.0;
    double cy = 0.0;
};

/// Greedy by descending window mass; a window is kept only if it shares at
/// most overlap_limit torus pixels with every window kept before it. Only
/// windows of positive mass are considered.
std::vector<PickedCell> pick_heavy_cells(const Image& folded, const AduafConfig& config, int fold);

/// Torus pixels shared by two windows of side w on a p x p torus.
std::size_t window_overlap(const PickedCell& a, const PickedCell& b, std::size_t w, std::size_t p);

struct CellPair {
    std::size_t first = 0;   // index into the fold-1 list
    std::size_t second = 0;  // index into the fold-2 list
    double distance = 0.0;
};

/// Score of a candidate pair: max(relative mass gap / mass_tol, sub-pixel
/// centroid gap / centroid_tol). Pairs scoring above 1 are never accepted.
double pair_distance(const PickedCell& a, const PickedCell& b, const AduafConfig& config);

/// Greedy over all candidates ordered by score, then by combined mass
/// (descending), then by mass gap. Each cell is used at most once.
std::vector<CellPair> match_pairs(std::span<const PickedCell> cells1, std::span<const PickedCell> cells2,
                                  const AduafConfig& config);

struct RecoveredStar {
    double x = 0.0;  // frame row coordinate, pixel i covers [i, i + 1)
    double y = 0.0;
    double mass = 0.0;
};

/// Per axis: the integer anchor comes from CRT over the two folds, the
/// sub-pixel part from the fold-1 centroid. Returns nullopt for a ghost
/// (reconstructed coordinate outside [0, n)).
std::optional<RecoveredStar> reconstruct_position(const PickedCell& a, const PickedCell& b,
                                                  const AduafConfig& config);

struct AduafStats {
    std::size_t picked1 = 0;
    std::size_t picked2 = 0;
    std::size_t pairs = 0;
    std::size_t ghosts = 0;
    std::size_t merged = 0;
};

/// pick -> match -> reconstruct -> merge; sorted by mass descending.
std::vector<RecoveredStar> aduaf_recover(const Image& z1, const Image& z2, const AduafConfig& config,
                                         AduafStats* stats = nullptr);

/// x,y,mass
void write_stars_csv(std::ostream& out, std::span<const RecoveredStar> stars);

}  // namespace locsketch
