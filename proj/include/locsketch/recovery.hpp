#pragma once

// Recovery from a sketch: heavy buckets, k-center clustering with outliers,
// codeword assembly and decoding, plus ground-truth diagnostics.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "locsketch/codes.hpp"
#include "locsketch/image_model.hpp"
#include "locsketch/measurement.hpp"

namespace locsketch {

struct HeavyEntry {
    unsigned row = 0;
    std::uint64_t bucket = 0;
    FeatureVector feature;
};

/// Buckets whose feature magnitude is at least T/2, in (row, bucket) order.
struct HeavySet {
    std::vector<HeavyEntry> entries;
    double threshold = 0.0;
};

HeavySet find_heavy(const Sketch& sketch, double T, const FeatureNorm& norm);

struct KCenterResult {
    std::vector<std::size_t> centers;  // point indices, in selection order
    std::vector<int> assignment;       // cluster id per point, -1 for outliers
};

/// Greedy disk covering: up to k times, take the point whose r_guess-ball holds
/// the most uncovered points (ties: heavier point, then lower index) and cover
/// everything within expansion * r_guess of it.
KCenterResult kcenter_outliers(std::span<const FeatureVector> points, std::size_t k, double r_guess,
                               const FeatureNorm& norm, double expansion = 3.0);

struct ClusterPartition {
    std::vector<std::vector<std::size_t>> clusters;  // indices into HeavySet::entries
    std::vector<std::size_t> outliers;
    double outlier_budget = 0.0;

    bool outlier_budget_exceeded() const { return static_cast<double>(outliers.size()) > outlier_budget; }
};

/// k-center with radius T/12 expanded threefold, so every cluster has feature
/// diameter at most T/2. Leftover entries become outliers.
ClusterPartition cluster_heavy(const HeavySet& heavy, std::size_t k, double T, const FeatureNorm& norm,
                               double outlier_budget);

/// One codeword per cluster slot (k in total). Row i takes the smallest bucket
/// of row i in the cluster, or an erasure. Missing clusters are all-erasure.
std::vector<Codeword> build_codewords(const ClusterPartition& partition, const HeavySet& heavy, unsigned s,
                                      std::size_t k);

struct ClusterDecode {
    std::size_t cluster = 0;
    Codeword word;
    std::optional<std::uint64_t> cell;  // decoder output, even when >= N
    bool valid = false;                 // decoded and inside [N]
    unsigned errors = 0;                // disagreements with g(cell) on non-erased rows, when valid
    unsigned erasures = 0;
};

struct RecoveryResult {
    std::vector<ClusterDecode> decodes;  // exactly k slots
    std::vector<std::pair<std::uint64_t, std::size_t>> cells;  // unique valid cells with multiplicity
    std::size_t heavy = 0;
    std::size_t outliers = 0;
    bool outlier_budget_exceeded = false;

    /// |D intersect cells|.
    std::size_t count_in(std::span<const std::uint64_t> sorted_cells) const;
};

RecoveryResult recover(const Sketch& sketch, const MeasurementPlan& plan, std::size_t k, double T,
                       const FeatureNorm& norm, const Constants& constants = {});

/// cluster,cell,valid,errors,erasures
void write_recovery_csv(std::ostream& out, const RecoveryResult& result);

/// Pixel-wise median over the s buckets the cell hashes to.
Image estimate_cell_contents(const Sketch& sketch, const MeasurementPlan& plan, std::uint64_t cell);

struct Diagnostics {
    std::size_t preserved = 0;          // |P|
    std::size_t heavy = 0;              // |R|
    std::size_t heavy_not_preserved = 0;  // |R \ P|
    std::size_t errors = 0;             // over all k codewords, against their best-matching cell in S
    std::size_t erasures = 0;
    std::size_t full_cells = 0;         // |S|
    std::size_t touched_cells = 0;      // |S'|
    std::size_t correct = 0;            // |D intersect S|
    std::size_t outliers = 0;
};

/// Ground-truth quantities. `grid` must be the plan's grid classified against
/// the true placement; `clean` is the noiseless image x.
Diagnostics diagnose(const Sketch& sketch, const MeasurementPlan& plan, const Image& clean, const GridView& grid,
                     std::size_t k, double T, const FeatureNorm& norm, const Constants& constants = {});

}  // namespace locsketch
