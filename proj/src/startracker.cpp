#include "locsketch/startracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <numeric>
#include <thread>
#include <tuple>

#include "locsketch/measurement.hpp"

namespace locsketch {

namespace {

constexpr double kPi = std::numbers::pi;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, std::size_t line, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw std::runtime_error("catalog line " + std::to_string(line) + ": bad " + what + " '" + text + "'");
}

// Uniform grid over the sky rectangle with square buckets of a given side.
class SkyGrid {
public:
    SkyGrid(const std::vector<Star>& stars, double side) : side_(side) {
        cols_ = static_cast<std::size_t>(std::ceil(2 * kPi / side)) + 1;
        rows_ = static_cast<std::size_t>(std::ceil(kPi / side)) + 1;
        start_.assign(cols_ * rows_ + 1, 0);
        for (const auto& s : stars) ++start_[key(s.ra, s.dec) + 1];
        for (std::size_t i = 1; i < start_.size(); ++i) start_[i] += start_[i - 1];
        members_.resize(stars.size());
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < stars.size(); ++i) members_[fill[key(stars[i].ra, stars[i].dec)]++] = i;
    }

    // Calls f(index) for every star whose bucket is within one bucket of (ra, dec).
    template <typename F>
    void visit(double ra, double dec, F&& f) const {
        const auto cx = static_cast<long>(col(ra));
        const auto cy = static_cast<long>(row(dec));
        for (long dx = -1; dx <= 1; ++dx) {
            for (long dy = -1; dy <= 1; ++dy) {
                const long x = cx + dx, y = cy + dy;
                if (x < 0 || y < 0 || x >= static_cast<long>(cols_) || y >= static_cast<long>(rows_)) continue;
                const std::size_t k = static_cast<std::size_t>(x) * rows_ + static_cast<std::size_t>(y);
                for (std::size_t i = start_[k]; i < start_[k + 1]; ++i) f(members_[i]);
            }
        }
    }

private:
    std::size_t col(double ra) const {
        return std::min(cols_ - 1, static_cast<std::size_t>(std::max(0.0, (ra + kPi) / side_)));
    }
    std::size_t row(double dec) const {
        return std::min(rows_ - 1, static_cast<std::size_t>(std::max(0.0, (dec + kPi / 2) / side_)));
    }
    std::size_t key(double ra, double dec) const { return col(ra) * rows_ + row(dec); }

    double side_;
    std::size_t cols_ = 0, rows_ = 0;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> members_;
};

}  // namespace

double separation(const Star& a, const Star& b) { return std::hypot(a.ra - b.ra, a.dec - b.dec); }

StarCatalog read_catalog_csv(std::istream& in) {
    StarCatalog cat;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (!header) {
            std::string h;
            for (char c : line) {
                if (c != ' ' && c != '\t' && c != '\r') h.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
            if (h != "ra,dec,mass") throw std::runtime_error("catalog line " + std::to_string(lineno) + ": expected header ra,dec,mass");
            header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(trim(f));
        if (fields.size() != 3) {
            throw std::runtime_error("catalog line " + std::to_string(lineno) + ": expected 3 fields, got " +
                                     std::to_string(fields.size()));
        }
        Star s;
        s.id = static_cast<std::uint32_t>(cat.stars.size());
        s.ra = parse_double(fields[0], lineno, "ra");
        s.dec = parse_double(fields[1], lineno, "dec");
        s.mass = parse_double(fields[2], lineno, "mass");
        if (s.ra < -kPi || s.ra > kPi) throw std::runtime_error("catalog line " + std::to_string(lineno) + ": ra outside [-pi, pi]");
        if (s.dec < -kPi / 2 || s.dec > kPi / 2) {
            throw std::runtime_error("catalog line " + std::to_string(lineno) + ": dec outside [-pi/2, pi/2]");
        }
        if (!(s.mass > 0.0)) throw std::runtime_error("catalog line " + std::to_string(lineno) + ": mass must be positive");
        cat.stars.push_back(s);
    }
    return cat;
}

StarCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open catalog " + path);
    return read_catalog_csv(in);
}

void write_catalog_csv(std::ostream& out, const StarCatalog& catalog) {
    out << "ra,dec,mass\n";
    out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& s : catalog.stars) out << s.ra << ',' << s.dec << ',' << s.mass << '\n';
}

StarCatalog generate_catalog(Rng& rng, std::size_t count, double exponent) {
    if (count == 0) throw std::invalid_argument("catalog size must be positive");
    if (!std::isfinite(exponent)) throw std::invalid_argument("catalog exponent must be finite");
    std::uniform_real_distribution<double> ra(-kPi, kPi);
    std::uniform_real_distribution<double> dec(-kPi / 2, kPi / 2);
    StarCatalog cat;
    cat.stars.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        Star s;
        s.id = static_cast<std::uint32_t>(j);
        s.ra = ra(rng);
        s.dec = dec(rng);
        s.mass = std::pow(static_cast<double>(j + 1), exponent);
        cat.stars.push_back(s);
    }
    return cat;
}

StarCatalog build_subset(const StarCatalog& catalog, double radius, std::size_t top_m) {
    if (!(radius > 0.0) || top_m == 0) throw std::invalid_argument("subset needs radius > 0 and top_m > 0");
    const auto& stars = catalog.stars;
    const SkyGrid grid(stars, radius);
    std::vector<bool> keep(stars.size(), false);
    std::vector<std::size_t> ball;
    const double r2 = radius * radius;
    auto heavier = [&](std::size_t a, std::size_t b) {
        if (stars[a].mass != stars[b].mass) return stars[a].mass > stars[b].mass;
        return stars[a].id < stars[b].id;
    };
    for (std::size_t c = 0; c < stars.size(); ++c) {
        ball.clear();
        grid.visit(stars[c].ra, stars[c].dec, [&](std::size_t i) {
            const double dx = stars[c].ra - stars[i].ra, dy = stars[c].dec - stars[i].dec;
            if (dx * dx + dy * dy <= r2) ball.push_back(i);
        });
        const std::size_t m = std::min(top_m, ball.size());
        std::partial_sort(ball.begin(), ball.begin() + static_cast<std::ptrdiff_t>(m), ball.end(), heavier);
        for (std::size_t i = 0; i < m; ++i) keep[ball[i]] = true;
    }
    StarCatalog out;
    for (std::size_t i = 0; i < stars.size(); ++i) {
        if (keep[i]) out.stars.push_back(stars[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------

PairDatabase::PairDatabase(StarCatalog catalog, double max_separation)
    : catalog_(std::move(catalog)), max_separation_(max_separation) {
    if (!(max_separation_ > 0.0)) throw std::invalid_argument("pair database needs a positive separation limit");
    const auto& stars = catalog_.stars;
    if (stars.size() > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("catalog too large");
    const SkyGrid grid(stars, max_separation_);
    std::vector<std::vector<Neighbor>> adj(stars.size());
    for (std::size_t a = 0; a < stars.size(); ++a) {
        grid.visit(stars[a].ra, stars[a].dec, [&](std::size_t b) {
            if (b == a) return;
            const double d = locsketch::separation(stars[a], stars[b]);
            if (d < max_separation_) {
                adj[a].push_back({static_cast<std::uint32_t>(b), d});
                if (a < b) pairs_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), d});
            }
        });
    }
    std::sort(pairs_.begin(), pairs_.end(), [](const CatalogPair& x, const CatalogPair& y) {
        if (x.separation != y.separation) return x.separation < y.separation;
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    neighbor_offsets_.assign(1, 0);
    for (auto& list : adj) {
        std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) {
            if (x.separation != y.separation) return x.separation < y.separation;
            return x.star < y.star;
        });
        neighbors_.insert(neighbors_.end(), list.begin(), list.end());
        neighbor_offsets_.push_back(neighbors_.size());
    }
}

std::span<const CatalogPair> PairDatabase::in_range(double lo, double hi) const {
    const auto first = std::lower_bound(pairs_.begin(), pairs_.end(), lo,
                                        [](const CatalogPair& p, double v) { return p.separation < v; });
    const auto last = std::upper_bound(first, pairs_.end(), hi,
                                       [](double v, const CatalogPair& p) { return v < p.separation; });
    return {first, last};
}

std::span<const Neighbor> PairDatabase::neighbors(std::uint32_t star) const {
    return std::span<const Neighbor>(neighbors_).subspan(neighbor_offsets_[star],
                                                         neighbor_offsets_[star + 1] - neighbor_offsets_[star]);
}

std::span<const Neighbor> PairDatabase::neighbors_in_range(std::uint32_t star, double lo, double hi) const {
    const auto all = neighbors(star);
    const auto first = std::lower_bound(all.begin(), all.end(), lo,
                                        [](const Neighbor& p, double v) { return p.separation < v; });
    const auto last = std::upper_bound(first, all.end(), hi,
                                       [](double v, const Neighbor& p) { return v < p.separation; });
    return {first, last};
}

double PairDatabase::separation(std::uint32_t a, std::uint32_t b) const {
    return locsketch::separation(catalog_.stars[a], catalog_.stars[b]);
}

PairDatabase build_pair_db(const StarCatalog& subset, double fov) {
    return PairDatabase(subset, fov * std::numbers::sqrt2);
}

// ---------------------------------------------------------------------------

void PatchConfig::validate() const {
    if (!(fov > 0.0) || n == 0) throw std::invalid_argument("patch needs fov > 0 and n > 0");
    if (noise_sigma < 0.0 || !(psf_sigma > 0.0) || !(photon_scale > 0.0)) {
        throw std::invalid_argument("patch noise, PSF width and photon scale must be positive");
    }
    if (declination_cut < 0.0 || declination_cut > kPi / 2) throw std::invalid_argument("declination cut outside [0, pi/2]");
}

PlacedStar project(const Star& star, double ra0, double dec0, const PatchConfig& config) {
    const double scale = config.pixel_scale();
    return {star.id, (star.ra - ra0 + config.fov / 2) / scale, (star.dec - dec0 + config.fov / 2) / scale,
            star.mass * config.photon_scale};
}

SkyPatch render_patch(Rng& rng, const StarCatalog& catalog, double ra0, double dec0, const PatchConfig& config) {
    config.validate();
    SkyPatch patch;
    patch.ra0 = ra0;
    patch.dec0 = dec0;
    patch.clean = Image(config.n);
    const auto reach = static_cast<long>(std::ceil(8.0 * config.psf_sigma)) + 1;
    const double n = static_cast<double>(config.n);
    const double inv = 1.0 / (config.psf_sigma * std::numbers::sqrt2);
    std::vector<double> wx(2 * reach + 1), wy(2 * reach + 1);
    for (const auto& s : catalog.stars) {
        const PlacedStar p = project(s, ra0, dec0, config);
        if (p.x < -static_cast<double>(reach) || p.x >= n + reach || p.y < -static_cast<double>(reach) || p.y >= n + reach) {
            continue;
        }
        if (p.x >= 0.0 && p.x < n && p.y >= 0.0 && p.y < n) patch.stars.push_back(p);
        const auto bx = static_cast<long>(std::floor(p.x)) - reach;
        const auto by = static_cast<long>(std::floor(p.y)) - reach;
        for (long i = 0; i <= 2 * reach; ++i) {
            wx[i] = 0.5 * (std::erf((bx + i + 1 - p.x) * inv) - std::erf((bx + i - p.x) * inv));
            wy[i] = 0.5 * (std::erf((by + i + 1 - p.y) * inv) - std::erf((by + i - p.y) * inv));
        }
        for (long i = 0; i <= 2 * reach; ++i) {
            const long x = bx + i;
            if (x < 0 || x >= static_cast<long>(config.n)) continue;
            for (long j = 0; j <= 2 * reach; ++j) {
                const long y = by + j;
                if (y < 0 || y >= static_cast<long>(config.n)) continue;
                patch.clean.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) += p.photons * wx[i] * wy[j];
            }
        }
    }
    patch.observed = patch.clean;
    if (config.poisson) {
        for (double& v : patch.observed.pixels()) {
            if (v > 0.0) v = static_cast<double>(std::poisson_distribution<long long>(v)(rng));
        }
    }
    if (config.noise_sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, config.noise_sigma);
        for (double& v : patch.observed.pixels()) v += gauss(rng);
    }
    return patch;
}

SkyPatch simulate_patch(Rng& rng, const StarCatalog& catalog, const PatchConfig& config) {
    config.validate();
    std::uniform_real_distribution<double> ra(-kPi + config.fov / 2, kPi - config.fov / 2);
    std::uniform_real_distribution<double> dec(-config.declination_cut, config.declination_cut);
    const double ra0 = ra(rng);
    const double dec0 = dec(rng);
    return render_patch(rng, catalog, ra0, dec0, config);
}

double photon_scale_for_median(const StarCatalog& catalog, double photons) {
    if (catalog.stars.empty()) throw std::invalid_argument("photon scale needs a nonempty catalog");
    std::vector<double> masses;
    for (const auto& s : catalog.stars) masses.push_back(s.mass);
    const auto mid = masses.begin() + static_cast<std::ptrdiff_t>(masses.size() / 2);
    std::nth_element(masses.begin(), mid, masses.end());
    return photons / *mid;
}

// ---------------------------------------------------------------------------

std::string to_string(IdentifyStatus status) {
    switch (status) {
        case IdentifyStatus::Matched: return "matched";
        case IdentifyStatus::NotEnoughStars: return "not-enough-stars";
        case IdentifyStatus::NoMatch: return "no-match";
    }
    return "unknown";
}

IdentificationResult identify(std::span<const Centroid> centroids, const PairDatabase& db,
                              const IdentifyOptions& options) {
    IdentificationResult result;
    if (centroids.size() < 3) {
        result.status = IdentifyStatus::NotEnoughStars;
        return result;
    }
    std::vector<std::size_t> order(centroids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return centroids[a].mass > centroids[b].mass; });
    if (order.size() > options.max_centroids) order.resize(options.max_centroids);

    const double tol = options.tolerance;
    const double limit = db.max_separation();
    auto dist = [&](std::size_t a, std::size_t b) {
        return options.pixel_scale * std::hypot(centroids[a].x - centroids[b].x, centroids[a].y - centroids[b].y);
    };
    auto fits = [&](std::uint32_t a, std::uint32_t b, double d) {
        const double sep = db.separation(a, b);
        return sep < limit && std::abs(sep - d) <= tol;
    };
    auto finish = [&](std::vector<std::size_t> cs, std::vector<std::uint32_t> ss) {
        result.status = IdentifyStatus::Matched;
        result.centroids = std::move(cs);
        result.stars = std::move(ss);
        for (auto s : result.stars) result.ids.push_back(db.catalog().stars[s].id);
        return result;
    };

    const std::size_t m = order.size();
    for (std::size_t u = 0; u < m; ++u) {
        for (std::size_t v = u + 1; v < m; ++v) {
            for (std::size_t w = v + 1; w < m; ++w) {
                const std::size_t i = order[u], j = order[v], l = order[w];
                const double dij = dist(i, j), dil = dist(i, l), djl = dist(j, l);
                if (dij - tol >= limit || dil - tol >= limit || djl - tol >= limit) continue;
                for (const auto& pair : db.in_range(dij - tol, dij + tol)) {
                    for (int flip = 0; flip < 2; ++flip) {
                        const std::uint32_t a = flip ? pair.b : pair.a;
                        const std::uint32_t b = flip ? pair.a : pair.b;
                        for (const auto& nc : db.neighbors_in_range(a, dil - tol, dil + tol)) {
                            const std::uint32_t c = nc.star;
                            if (c == b || !fits(b, c, djl)) continue;
                            if (options.min_match_stars <= 3) return finish({i, j, l}, {a, b, c});
                            for (std::size_t t = 0; t < m; ++t) {
                                const std::size_t extra = order[t];
                                if (extra == i || extra == j || extra == l) continue;
                                const double dei = dist(extra, i), dej = dist(extra, j), del = dist(extra, l);
                                for (const auto& ne : db.neighbors_in_range(a, dei - tol, dei + tol)) {
                                    const std::uint32_t e = ne.star;
                                    if (e == b || e == c) continue;
                                    if (fits(b, e, dej) && fits(c, e, del)) return finish({i, j, l, extra}, {a, b, c, e});
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    result.status = IdentifyStatus::NoMatch;
    return result;
}

bool match_is_consistent(const IdentificationResult& result, std::span<const Centroid> centroids,
                         const PairDatabase& db, const IdentifyOptions& options) {
    if (!result.matched()) return true;
    if (result.centroids.size() != result.stars.size() || result.stars.size() < 3) return false;
    for (std::size_t u = 0; u < result.stars.size(); ++u) {
        for (std::size_t v = u + 1; v < result.stars.size(); ++v) {
            if (result.stars[u] == result.stars[v]) return false;
            const auto& a = centroids[result.centroids[u]];
            const auto& b = centroids[result.centroids[v]];
            const double d = options.pixel_scale * std::hypot(a.x - b.x, a.y - b.y);
            const double sep = db.separation(result.stars[u], result.stars[v]);
            if (!(sep < db.max_separation()) || std::abs(sep - d) > options.tolerance) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

bool run_trial(const SkyPatch& patch, const PairDatabase& db, const ExperimentConfig& config, std::size_t p1,
               std::size_t p2, double sigma, std::span<const double> noise1, std::span<const double> noise2) {
    AduafConfig ac = config.aduaf;
    ac.n = config.patch.n;
    ac.p1 = p1;
    ac.p2 = p2;
    Image z1 = fold2d(patch.observed, p1);
    Image z2 = fold2d(patch.observed, p2);
    auto add = [sigma](Image& z, std::span<const double> noise) {
        auto px = z.pixels();
        if (noise.size() != px.size()) throw std::invalid_argument("noise field size mismatch");
        for (std::size_t i = 0; i < px.size(); ++i) px[i] += sigma * noise[i];
    };
    add(z1, noise1);
    add(z2, noise2);
    const auto stars = aduaf_recover(z1, z2, ac);
    std::vector<Centroid> centroids;
    for (const auto& s : stars) centroids.push_back({s.x, s.y, s.mass});
    IdentifyOptions opt;
    opt.pixel_scale = config.patch.pixel_scale();
    opt.tolerance = config.match_tolerance_px * opt.pixel_scale;
    opt.min_match_stars = config.min_match_stars;
    const auto match = identify(centroids, db, opt);
    if (!match.matched()) return false;
    for (std::size_t k = 0; k < match.centroids.size(); ++k) {
        const auto& c = centroids[match.centroids[k]];
        const PlacedStar* nearest = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : patch.stars) {
            const double d = std::hypot(s.x - c.x, s.y - c.y);
            if (d < best) {
                best = d;
                nearest = &s;
            }
        }
        if (!nearest || best > config.truth_radius_px || nearest->id != match.ids[k]) return false;
    }
    return true;
}

std::vector<ExperimentRow> run_experiment(const StarCatalog& catalog, const PairDatabase& db,
                                          const ExperimentConfig& config) {
    config.patch.validate();
    for (const auto& [p1, p2] : config.prime_pairs) FoldPlan::make(p1, p2, config.patch.n);
    std::vector<ExperimentRow> rows;
    if (config.trials == 0) return rows;
    const std::size_t np = config.prime_pairs.size();
    const std::size_t ns = config.sigmas.size();
    std::vector<unsigned char> success(config.trials * np * ns, 0);
    std::vector<double> seconds(config.trials * np * ns, 0.0);

    auto work = [&](std::size_t t) {
        Rng patch_rng = substream(config.seed, 2 * t);
        Rng noise_rng = substream(config.seed, 2 * t + 1);
        const SkyPatch patch = simulate_patch(patch_rng, catalog, config.patch);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t pi = 0; pi < np; ++pi) {
            const auto [p1, p2] = config.prime_pairs[pi];
            std::vector<double> n1(p1 * p1), n2(p2 * p2);
            for (double& v : n1) v = gauss(noise_rng);
            for (double& v : n2) v = gauss(noise_rng);
            for (std::size_t si = 0; si < ns; ++si) {
                const auto start = std::chrono::steady_clock::now();
                const bool ok = run_trial(patch, db, config, p1, p2, config.sigmas[si], n1, n2);
                const auto stop = std::chrono::steady_clock::now();
                const std::size_t slot = (t * np + pi) * ns + si;
                success[slot] = ok ? 1 : 0;
                seconds[slot] = std::chrono::duration<double>(stop - start).count();
            }
        }
    };

    const unsigned jobs = std::max(1U, std::min<unsigned>(config.jobs, static_cast<unsigned>(config.trials)));
    if (jobs == 1) {
        for (std::size_t t = 0; t < config.trials; ++t) work(t);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(jobs);
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back([&, j] {
                try {
                    for (std::size_t t = j; t < config.trials; t += jobs) work(t);
                } catch (...) {
                    errors[j] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    for (std::size_t pi = 0; pi < np; ++pi) {
        for (std::size_t si = 0; si < ns; ++si) {
            ExperimentRow row;
            row.sigma = config.sigmas[si];
            row.p1 = config.prime_pairs[pi].first;
            row.p2 = config.prime_pairs[pi].second;
            row.trials = config.trials;
            double total = 0.0;
            for (std::size_t t = 0; t < config.trials; ++t) {
                const std::size_t slot = (t * np + pi) * ns + si;
                row.successes += success[slot];
                total += seconds[slot];
            }
            if (config.timing) row.mean_runtime = total / static_cast<double>(config.trials);
            rows.push_back(row);
        }
    }
    return rows;
}

void write_experiment_csv(std::ostream& out, std::span<const ExperimentRow> rows) {
    out << "sigma,p1,p2,trials,successes,mean_runtime\n";
    for (const auto& r : rows) {
        out << r.sigma << ',' << r.p1 << ',' << r.p2 << ',' << r.trials << ',' << r.successes << ',';
        if (r.mean_runtime) out << *r.mean_runtime;
        else out << "NA";
        out << '\n';
    }
}

}  // namespace locsketch
