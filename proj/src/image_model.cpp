#include "locsketch/image_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace locsketch {

void ModelConfig::validate() const {
    if (w == 0) throw std::invalid_argument("object side w must be positive");
    if (w_prime < w) throw std::invalid_argument("cell side w' must be at least w");
    if (w > n) throw std::invalid_argument("object side w exceeds image side n");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}

ObjectTemplate::ObjectTemplate(Image pixels) : pixels_(std::move(pixels)) {
    if (pixels_.rows() == 0 || pixels_.rows() != pixels_.cols()) {
        throw std::invalid_argument("object template must be a nonempty square block");
    }
    for (double v : pixels_.pixels()) {
        if (!(v >= 0.0)) throw std::invalid_argument("object template pixels must be non-negative");
    }
}

std::vector<ObjectTemplate> scaled_templates(std::size_t w, std::size_t count, double first_mass,
                                             double mass_step) {
    Image shape(w);
    for (std::size_t i = 0; i < w; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            shape.at(i, j) = static_cast<double>(std::min(i + 1, w - i) * std::min(j + 1, w - j));
        }
    }
    const double total = shape.sum();
    std::vector<ObjectTemplate> out;
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        const double mass = first_mass + mass_step * static_cast<double>(t);
        Image px = shape;
        for (double& v : px.pixels()) v *= mass / total;
        out.emplace_back(std::move(px));
    }
    return out;
}

bool Placement::is_valid(std::size_t min_separation) const {
    for (std::size_t i = 0; i < translations.size(); ++i) {
        for (std::size_t j = i + 1; j < translations.size(); ++j) {
            const auto& a = translations[i];
            const auto& b = translations[j];
            const std::size_t dx = a.x > b.x ? a.x - b.x : b.x - a.x;
            const std::size_t dy = a.y > b.y ? a.y - b.y : b.y - a.y;
            if (std::max(dx, dy) < min_separation) return false;
        }
    }
    return true;
}

Placement place_objects(Rng& rng, const ModelConfig& config, std::size_t count) {
    config.validate();
    constexpr int kRestarts = 50;
    constexpr int kAttemptsPerObject = 2000;
    std::uniform_int_distribution<std::size_t> coord(0, config.n - config.w);
    for (int restart = 0; restart < kRestarts; ++restart) {
        Placement p;
        bool stuck = false;
        while (p.translations.size() < count && !stuck) {
            stuck = true;
            for (int attempt = 0; attempt < kAttemptsPerObject; ++attempt) {
                const Translation t{coord(rng), coord(rng)};
                const bool clear = std::all_of(p.translations.begin(), p.translations.end(), [&](const Translation& o) {
                    const std::size_t dx = t.x > o.x ? t.x - o.x : o.x - t.x;
                    const std::size_t dy = t.y > o.y ? t.y - o.y : o.y - t.y;
                    return std::max(dx, dy) >= config.w_prime;
                });
                if (clear) {
                    p.translations.push_back(t);
                    stuck = false;
                    break;
                }
            }
        }
        if (!stuck) return p;
    }
    throw std::runtime_error("cannot place " + std::to_string(count) + " objects with separation " +
                             std::to_string(config.w_prime) + " in a " + std::to_string(config.n) +
                             "-pixel image");
}

Image render(const ModelConfig& config, std::span<const ObjectTemplate> templates,
             const Placement& placement) {
    if (templates.size() < placement.translations.size()) {
        throw std::invalid_argument("render: fewer templates than placed objects");
    }
    Image x(config.n);
    for (std::size_t i = 0; i < placement.translations.size(); ++i) {
        const auto& t = placement.translations[i];
        const Image& o = templates[i].pixels();
        if (t.x + o.rows() > config.n || t.y + o.cols() > config.n) {
            throw std::invalid_argument("render: object box leaves the image");
        }
        for (std::size_t a = 0; a < o.rows(); ++a) {
            for (std::size_t b = 0; b < o.cols(); ++b) x.at(t.x + a, t.y + b) += o.at(a, b);
        }
    }
    return x;
}

// ---------------------------------------------------------------------------

void FeatureNorm::validate() const {
    if (!(mass_scale > 0.0) || !std::isfinite(mass_scale) || !(centroid_scale > 0.0) ||
        !std::isfinite(centroid_scale)) {
        throw std::invalid_argument("feature norm scales must be positive and finite");
    }
}

double FeatureNorm::magnitude(const FeatureVector& f) const { return std::abs(f.mass) / mass_scale; }

FeatureNorm default_norm(std::span<const ObjectTemplate> templates) {
    if (templates.empty()) throw std::invalid_argument("default_norm needs at least one template");
    std::vector<double> masses;
    for (const auto& t : templates) masses.push_back(t.mass());
    std::sort(masses.begin(), masses.end());
    const std::size_t mid = masses.size() / 2;
    const double median = masses.size() % 2 ? masses[mid] : 0.5 * (masses[mid - 1] + masses[mid]);
    FeatureNorm norm{median, static_cast<double>(templates.front().side()) / 2.0};
    norm.validate();
    return norm;
}

FeatureVector feature(std::span<const double> cell, std::size_t side) {
    if (cell.size() != side * side) throw std::invalid_argument("feature: cell is not side x side");
    double mass = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t x = 0; x < side; ++x) {
        for (std::size_t y = 0; y < side; ++y) {
            const double v = cell[x * side + y];
            mass += v;
            sx += v * static_cast<double>(x);
            sy += v * static_cast<double>(y);
        }
    }
    if (mass == 0.0) return {};
    return {mass, sx / mass, sy / mass};
}

FeatureVector feature(const Image& cell) {
    if (cell.rows() != cell.cols()) throw std::invalid_argument("feature: cell must be square");
    return feature(cell.pixels(), cell.rows());
}

double feature_distance(const FeatureVector& a, const FeatureVector& b, const FeatureNorm& norm) {
    const bool a_empty = a.mass == 0.0;
    const bool b_empty = b.mass == 0.0;
    if (a_empty && b_empty) return 0.0;
    if (a_empty != b_empty) return std::numeric_limits<double>::infinity();
    return std::max({std::abs(a.mass - b.mass) / norm.mass_scale, std::abs(a.cx - b.cx) / norm.centroid_scale,
                     std::abs(a.cy - b.cy) / norm.centroid_scale});
}

double distinguishability_threshold(std::span<const ObjectTemplate> templates, std::size_t w_prime,
                                    const FeatureNorm& norm) {
    if (templates.empty()) throw std::invalid_argument("distinguishability_threshold needs templates");
    std::vector<FeatureVector> feats;
    for (const auto& t : templates) {
        if (t.side() > w_prime) throw std::invalid_argument("template larger than a cell");
        Image cell(w_prime);
        for (std::size_t a = 0; a < t.side(); ++a) {
            for (std::size_t b = 0; b < t.side(); ++b) cell.at(a, b) = t.pixels().at(a, b);
        }
        feats.push_back(feature(cell));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < feats.size(); ++i) {
        best = std::min(best, norm.magnitude(feats[i]));
        for (std::size_t j = i + 1; j < feats.size(); ++j) best = std::min(best, feature_distance(feats[i], feats[j], norm));
    }
    return best;
}

// ---------------------------------------------------------------------------

GridView GridView::make(std::size_t n, std::size_t w_prime, std::size_t vx, std::size_t vy) {
    if (n == 0 || w_prime == 0) throw std::invalid_argument("grid needs n > 0 and w' > 0");
    if (vx >= w_prime || vy >= w_prime) throw std::invalid_argument("grid shift must lie in [w')^2");
    GridView g;
    g.n = n;
    g.w_prime = w_prime;
    g.vx = vx;
    g.vy = vy;
    return g;
}

std::uint64_t GridView::cell_of(std::size_t x, std::size_t y) const {
    return static_cast<std::uint64_t>((x + vx) / w_prime) * cells_per_axis() + (y + vy) / w_prime;
}

std::size_t GridView::local_offset(std::size_t x, std::size_t y) const {
    return ((x + vx) % w_prime) * w_prime + (y + vy) % w_prime;
}

Image GridView::extract(const Image& image, std::uint64_t cell) const {
    if (image.rows() != n || image.cols() != n) throw std::invalid_argument("grid: image size mismatch");
    const std::size_t cpa = cells_per_axis();
    const std::size_t x0 = static_cast<std::size_t>(cell / cpa) * w_prime;
    const std::size_t y0 = static_cast<std::size_t>(cell % cpa) * w_prime;
    Image out(w_prime);
    for (std::size_t a = 0; a < w_prime; ++a) {
        const std::size_t px = x0 + a;
        if (px < vx || px - vx >= n) continue;
        for (std::size_t b = 0; b < w_prime; ++b) {
            const std::size_t py = y0 + b;
            if (py < vy || py - vy >= n) continue;
            out.at(a, b) = image.at(px - vx, py - vy);
        }
    }
    return out;
}

std::vector<Image> GridView::split(const Image& image) const {
    if (image.rows() != n || image.cols() != n) throw std::invalid_argument("grid: image size mismatch");
    std::vector<Image> cells(cell_count(), Image(w_prime));
    const std::size_t wsq = w_prime;
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            const std::size_t off = local_offset(x, y);
            cells[cell_of(x, y)].at(off / wsq, off % wsq) = image.at(x, y);
        }
    }
    return cells;
}

Image GridView::assemble_padded(std::span<const Image> cells) const {
    const std::size_t cpa = cells_per_axis();
    if (cells.size() != cell_count()) throw std::invalid_argument("assemble_padded: wrong cell count");
    Image out(cpa * w_prime);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::size_t x0 = (c / cpa) * w_prime;
        const std::size_t y0 = (c % cpa) * w_prime;
        for (std::size_t a = 0; a < w_prime; ++a) {
            for (std::size_t b = 0; b < w_prime; ++b) out.at(x0 + a, y0 + b) = cells[c].at(a, b);
        }
    }
    return out;
}

GridView sample_grid(Rng& rng, std::size_t n, std::size_t w_prime) {
    if (w_prime == 0) throw std::invalid_argument("grid needs w' > 0");
    std::uniform_int_distribution<std::size_t> shift(0, w_prime - 1);
    const std::size_t vx = shift(rng);
    const std::size_t vy = shift(rng);
    return GridView::make(n, w_prime, vx, vy);
}

void classify_cells(GridView& grid, const Placement& placement, std::size_t w) {
    std::set<std::uint64_t> full, touched;
    for (const auto& t : placement.translations) {
        const std::uint64_t first = grid.cell_of(t.x, t.y);
        const std::uint64_t last = grid.cell_of(t.x + w - 1, t.y + w - 1);
        if (first == last) full.insert(first);
        const std::size_t cpa = grid.cells_per_axis();
        for (std::uint64_t cx = first / cpa; cx <= last / cpa; ++cx) {
            for (std::uint64_t cy = first % cpa; cy <= last % cpa; ++cy) touched.insert(cx * cpa + cy);
        }
    }
    grid.full_cells.assign(full.begin(), full.end());
    grid.touched_cells.assign(touched.begin(), touched.end());
}

GridView impose_grid(Rng& rng, const ModelConfig& config, const Placement& placement) {
    GridView grid = sample_grid(rng, config.n, config.w_prime);
    classify_cells(grid, placement, config.w);
    return grid;
}

// ---------------------------------------------------------------------------

NoisyImage add_noise(Rng& rng, const Image& x, const NoiseSpec& spec) {
    if (spec.sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
    NoisyImage out{x, Image(x.rows(), x.cols())};
    auto observed = out.observed.pixels();
    if (spec.poisson) {
        for (double& v : observed) {
            if (v < 0.0) throw std::invalid_argument("Poisson noise needs non-negative pixels");
            if (v > 0.0) v = static_cast<double>(std::poisson_distribution<long long>(v)(rng));
        }
    }
    if (spec.sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, spec.sigma);
        for (double& v : observed) v += gauss(rng);
    }
    const auto truth = x.pixels();
    auto mu = out.noise.pixels();
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = observed[i] - truth[i];
    return out;
}

double noise_budget(const GridView& grid, const Image& noise, const FeatureNorm& norm) {
    std::vector<double> mass(grid.cell_count(), 0.0);
    for (std::size_t x = 0; x < grid.n; ++x) {
        for (std::size_t y = 0; y < grid.n; ++y) mass[grid.cell_of(x, y)] += noise.at(x, y);
    }
    double total = 0.0;
    for (double m : mass) total += norm.magnitude({m, 0.0, 0.0});
    return total;
}

}  // namespace locsketch
