#include "locsketch/aduaf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "locsketch/modular.hpp"

namespace locsketch {

void AduafConfig::validate() const {
    if (p1 == 0 || p2 == 0 || std::gcd(p1, p2) != 1) {
        throw std::invalid_argument("fold moduli " + std::to_string(p1) + ", " + std::to_string(p2) +
                                    " must be positive and coprime");
    }
    if (p1 * p2 < n) throw std::invalid_argument("fold moduli product must be at least n");
    if (cell_w == 0 || cell_w > std::min(p1, p2)) throw std::invalid_argument("window side must fit in both folds");
    if (!(mass_tol > 0.0) || !(centroid_tol > 0.0)) throw std::invalid_argument("match tolerances must be positive");
}

std::size_t window_overlap(const PickedCell& a, const PickedCell& b, std::size_t w, std::size_t p) {
    auto axis = [&](std::size_t s, std::size_t t) {
        std::size_t shared = 0;
        for (std::size_t i = 0; i < w; ++i) {
            const std::size_t u = (s + i) % p;
            for (std::size_t j = 0; j < w; ++j) {
                if ((t + j) % p == u) {
                    ++shared;
                    break;
                }
            }
        }
        return shared;
    };
    return axis(a.top, b.top) * axis(a.left, b.left);
}

std::vector<PickedCell> pick_heavy_cells(const Image& folded, const AduafConfig& config, int fold) {
    const std::size_t p = folded.rows();
    if (p == 0 || folded.cols() != p) throw std::invalid_argument("pick_heavy_cells: fold must be square");
    if (config.cell_w > p) throw std::invalid_argument("pick_heavy_cells: window larger than the fold");
    const std::size_t w = config.cell_w;

    // Window sums via row-then-column circular running sums.
    Image rowsum(p);
    for (std::size_t x = 0; x < p; ++x) {
        for (std::size_t y = 0; y < p; ++y) {
            double acc = 0.0;
            for (std::size_t j = 0; j < w; ++j) acc += folded.at(x, (y + j) % p);
            rowsum.at(x, y) = acc;
        }
    }
    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    candidates.reserve(p * p);
    for (std::size_t x = 0; x < p; ++x) {
        for (std::size_t y = 0; y < p; ++y) {
            double acc = 0.0;
            for (std::size_t i = 0; i < w; ++i) acc += rowsum.at((x + i) % p, y);
            if (acc > 0.0) candidates.emplace_back(acc, x, y);
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });

    std::vector<PickedCell> picked;
    for (const auto& [mass, top, left] : candidates) {
        if (picked.size() >= config.cells_per_fold) break;
        PickedCell cell{fold, top, left, mass, 0.0, 0.0};
        const bool ok = std::all_of(picked.begin(), picked.end(), [&](const PickedCell& other) {
            return window_overlap(cell, other, w, p) <= config.overlap_limit;
        });
        if (!ok) continue;
        double sx = 0.0, sy = 0.0, m = 0.0;
        for (std::size_t i = 0; i < w; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                const double v = folded.at((top + i) % p, (left + j) % p);
                m += v;
                sx += v * static_cast<double>(i);
                sy += v * static_cast<double>(j);
            }
        }
        cell.mass = m;
        cell.cx = static_cast<double>(top) + sx / m + 0.5;
        cell.cy = static_cast<double>(left) + sy / m + 0.5;
        picked.push_back(cell);
    }
    return picked;
}

namespace {

double frac(double v) { return v - std::floor(v); }

double circular_gap(double a, double b) {
    const double d = std::abs(frac(a) - frac(b));
    return std::min(d, 1.0 - d);
}

}  // namespace

double pair_distance(const PickedCell& a, const PickedCell& b, const AduafConfig& config) {
    const double big = std::max(std::abs(a.mass), std::abs(b.mass));
    const double rel = big > 0.0 ? std::abs(a.mass - b.mass) / big : 0.0;
    const double cen = std::max(circular_gap(a.cx, b.cx), circular_gap(a.cy, b.cy));
    return std::max(rel / config.mass_tol, cen / config.centroid_tol);
}

std::vector<CellPair> match_pairs(std::span<const PickedCell> cells1, std::span<const PickedCell> cells2,
                                  const AduafConfig& config) {
    struct Candidate {
        CellPair pair;
        double combined;
        double gap;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < cells1.size(); ++i) {
        for (std::size_t j = 0; j < cells2.size(); ++j) {
            const double d = pair_distance(cells1[i], cells2[j], config);
            if (d <= 1.0) {
                candidates.push_back({{i, j, d}, cells1[i].mass + cells2[j].mass,
                                      std::abs(cells1[i].mass - cells2[j].mass)});
            }
        }
    }
    // Scores are compared on a 1e-9 grid so that rounding noise between
    // identical windows does not outrank the combined-mass tie-break.
    auto key = [](double d) { return std::round(d * 1e9); };
    std::sort(candidates.begin(), candidates.end(), [&key](const Candidate& a, const Candidate& b) {
        if (key(a.pair.distance) != key(b.pair.distance)) return key(a.pair.distance) < key(b.pair.distance);
        if (a.combined != b.combined) return a.combined > b.combined;
        if (a.gap != b.gap) return a.gap < b.gap;
        return std::tie(a.pair.first, a.pair.second) < std::tie(b.pair.first, b.pair.second);
    });
    std::vector<bool> used1(cells1.size(), false), used2(cells2.size(), false);
    std::vector<CellPair> out;
    for (const auto& c : candidates) {
        if (out.size() >= config.max_pairs) break;
        if (used1[c.pair.first] || used2[c.pair.second]) continue;
        used1[c.pair.first] = used2[c.pair.second] = true;
        out.push_back(c.pair);
    }
    return out;
}

namespace {

// One axis: c1 is known mod p1, c2 mod p2, both with the same sub-pixel part.
std::optional<double> reconstruct_axis(double c1, double c2, double m1, double m2, const AduafConfig& config) {
    const auto p1 = static_cast<std::int64_t>(config.p1);
    const auto p2 = static_cast<std::int64_t>(config.p2);
    const double f1 = frac(c1);
    const auto a1 = ((static_cast<std::int64_t>(std::floor(c1)) % p1) + p1) % p1;
    const double shifted = c2 - f1;
    const double rounded = std::round(shifted);
    const auto a2 = ((static_cast<std::int64_t>(rounded) % p2) + p2) % p2;
    const std::array<Residue, 2> residues{Residue{static_cast<std::uint64_t>(a1), config.p1},
                                          Residue{static_cast<std::uint64_t>(a2), config.p2}};
    const auto anchor = static_cast<double>(crt_reconstruct(residues));
    const double residual = shifted - rounded;
    const double total = m1 + m2;
    const double w2 = total > 0.0 ? std::clamp(m2 / total, 0.0, 1.0) : 0.5;
    const double pos = anchor + f1 + w2 * residual;
    if (pos < 0.0 || pos >= static_cast<double>(config.n)) return std::nullopt;
    return pos;
}

}  // namespace

std::optional<RecoveredStar> reconstruct_position(const PickedCell& a, const PickedCell& b,
                                                  const AduafConfig& config) {
    const auto x = reconstruct_axis(a.cx, b.cx, a.mass, b.mass, config);
    const auto y = reconstruct_axis(a.cy, b.cy, a.mass, b.mass, config);
    if (!x || !y) return std::nullopt;
    return RecoveredStar{*x, *y, 0.5 * (a.mass + b.mass)};
}

std::vector<RecoveredStar> aduaf_recover(const Image& z1, const Image& z2, const AduafConfig& config,
                                         AduafStats* stats) {
    config.validate();
    if (z1.rows() != config.p1 || z2.rows() != config.p2) {
        throw std::invalid_argument("fold sizes do not match the configured moduli");
    }
    const auto cells1 = pick_heavy_cells(z1, config, 1);
    const auto cells2 = pick_heavy_cells(z2, config, 2);
    const auto pairs = match_pairs(cells1, cells2, config);
    AduafStats local;
    local.picked1 = cells1.size();
    local.picked2 = cells2.size();
    local.pairs = pairs.size();

    std::vector<RecoveredStar> found;
    for (const auto& pr : pairs) {
        if (auto star = reconstruct_position(cells1[pr.first], cells2[pr.second], config)) found.push_back(*star);
        else ++local.ghosts;
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const RecoveredStar& a, const RecoveredStar& b) { return a.mass > b.mass; });
    std::vector<RecoveredStar> out;
    for (const auto& s : found) {
        const bool dup = std::any_of(out.begin(), out.end(), [&](const RecoveredStar& kept) {
            return std::hypot(kept.x - s.x, kept.y - s.y) < config.merge_radius;
        });
        if (dup) ++local.merged;
        else out.push_back(s);
    }
    if (stats) *stats = local;
    return out;
}

void write_stars_csv(std::ostream& out, std::span<const RecoveredStar> stars) {
    out << "x,y,mass\n";
    out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& s : stars) out << s.x << ',' << s.y << ',' << s.mass << '\n';
}

}  // namespace locsketch
