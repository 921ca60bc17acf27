#include "locsketch/measurement.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "locsketch/modular.hpp"

namespace locsketch {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

void Constants::validate() const {
    if (!(alpha > 0.0) || !(gamma > 0.0) || !(eta > 0.0)) {
        throw std::invalid_argument("constants alpha, gamma, eta must be positive");
    }
    if (!(distance_fraction() < 1.0)) {
        throw std::invalid_argument("infeasible constants: 4(3*delta + beta) = " + fmt(distance_fraction()) +
                                    " must be < 1 (beta = " + fmt(beta()) + ", delta = " + fmt(delta()) + ")");
    }
}

MeasurementPlan::MeasurementPlan(IndependentCode code, GridView grid)
    : code_(std::move(code)), grid_(std::move(grid)) {
    if (code_.domain_size() != grid_.cell_count()) {
        throw std::invalid_argument("code domain " + std::to_string(code_.domain_size()) + " differs from cell count " +
                                    std::to_string(grid_.cell_count()));
    }
    offsets_.assign(1, 0);
    for (auto size : code_.alphabet_sizes()) offsets_.push_back(offsets_.back() + size);
    const unsigned s = code_.s();
    table_.resize(grid_.cell_count() * s);
    for (std::uint64_t c = 0; c < grid_.cell_count(); ++c) {
        const auto sym = code_.encode(c);
        std::copy(sym.begin(), sym.end(), table_.begin() + static_cast<std::ptrdiff_t>(c * s));
    }
}

std::span<const Symbol> MeasurementPlan::symbols(std::uint64_t cell) const {
    if (cell >= cells()) throw std::domain_error("cell outside [N]");
    return std::span<const Symbol>(table_).subspan(cell * rows(), rows());
}

PlanParameters resolve_plan_parameters(const PlanConfig& config) {
    config.constants.validate();
    if (config.n == 0 || config.w_prime == 0) throw std::invalid_argument("plan needs n > 0 and w' > 0");
    if (config.k == 0) throw std::invalid_argument("plan needs k > 0");
    const std::uint64_t cells = GridView::make(config.n, config.w_prime, 0, 0).cell_count();
    const double log_n = std::log(static_cast<double>(cells));
    if (static_cast<double>(config.k) < config.log_factor * log_n) {
        throw std::invalid_argument("k >= C log N violated: k = " + std::to_string(config.k) + ", C ln N = " +
                                    fmt(config.log_factor * log_n));
    }
    const double frac = config.constants.distance_fraction();
    const int given = int{config.q.has_value()} + int{config.s.has_value()} + int{config.r.has_value()};
    PlanParameters p;
    if (given == 0) {
        p.derived = true;
        p.q = static_cast<std::uint64_t>(std::ceil(static_cast<double>(config.k) / config.constants.eta));
        if (config.kind == CodeKind::ReedSolomon) p.q = *next_prime(p.q, UINT64_MAX);
        p.r = 1;
        while (true) {
            const auto space = checked_pow(p.q, p.r);
            if (!space) throw std::invalid_argument("q^r overflows before exceeding 2N");
            if (*space / 2 >= cells) break;
            ++p.r;
        }
        p.s = p.r + 1;
        while (static_cast<double>(p.s - p.r) < frac * p.s) ++p.s;
    } else if (given == 3) {
        p.q = *config.q;
        p.s = *config.s;
        p.r = *config.r;
        if (p.r == 0 || p.s <= p.r) throw std::invalid_argument("code needs 1 <= r < s");
        const auto space = checked_pow(p.q, p.r);
        if (space && *space / 2 < cells) {
            throw std::invalid_argument("q^r > 2N violated: q^r = " + std::to_string(*space) + ", 2N = " +
                                        std::to_string(2 * cells));
        }
        if (static_cast<double>(p.s - p.r) < frac * p.s) {
            throw std::invalid_argument("code distance s - r >= 4(3*delta + beta) s violated: s - r = " +
                                        std::to_string(p.s - p.r) + ", required " + fmt(frac * p.s));
        }
    } else {
        throw std::invalid_argument("explicit code parameters need all of q, s, r");
    }
    return p;
}

MeasurementPlan build_plan(const PlanConfig& config, Rng& rng) {
    const PlanParameters p = resolve_plan_parameters(config);
    GridView grid = sample_grid(rng, config.n, config.w_prime);
    auto code = sample_independent_code(config.kind, grid.cell_count(), p.s, p.q, p.r, rng);
    return MeasurementPlan(std::move(code), std::move(grid));
}

// ---------------------------------------------------------------------------

Sketch::Sketch(std::size_t w_prime, std::vector<std::uint64_t> row_sizes)
    : w_prime_(w_prime), row_sizes_(std::move(row_sizes)) {
    if (w_prime_ == 0) throw std::invalid_argument("sketch needs w' > 0");
    offsets_.assign(1, 0);
    for (auto size : row_sizes_) offsets_.push_back(offsets_.back() + size);
    data_.assign(offsets_.back() * bucket_pixels(), 0.0);
}

std::span<double> Sketch::bucket(unsigned row, std::uint64_t j) {
    return std::span<double>(data_).subspan((offsets_[row] + j) * bucket_pixels(), bucket_pixels());
}

std::span<const double> Sketch::bucket(unsigned row, std::uint64_t j) const {
    return std::span<const double>(data_).subspan((offsets_[row] + j) * bucket_pixels(), bucket_pixels());
}

Sketch& Sketch::operator+=(const Sketch& other) {
    if (other.w_prime_ != w_prime_ || other.row_sizes_ != row_sizes_) throw std::invalid_argument("sketch layout mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Sketch measure(const MeasurementPlan& plan, const Image& image) {
    const GridView& grid = plan.grid();
    if (image.rows() != grid.n || image.cols() != grid.n) {
        throw std::invalid_argument("measure: image is " + std::to_string(image.rows()) + "x" +
                                    std::to_string(image.cols()) + ", plan expects " + std::to_string(grid.n));
    }
    Sketch sketch(plan.w_prime(), plan.row_sizes());
    auto data = sketch.values();
    const std::size_t bp = sketch.bucket_pixels();
    const unsigned s = plan.rows();
    for (std::size_t x = 0; x < grid.n; ++x) {
        for (std::size_t y = 0; y < grid.n; ++y) {
            const double v = image.at(x, y);
            const auto sym = plan.symbols(grid.cell_of(x, y));
            const std::size_t off = grid.local_offset(x, y);
            for (unsigned i = 0; i < s; ++i) data[(plan.row_offset(i) + sym[i]) * bp + off] += v;
        }
    }
    return sketch;
}

std::uint64_t measurement_count(const MeasurementPlan& plan) {
    return plan.w_prime() * plan.w_prime() * plan.total_buckets();
}

void write_sketch_binary(std::ostream& out, const Sketch& sketch) {
    auto put = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    put(sketch.rows());
    for (auto size : sketch.row_sizes()) put(size);
    put(sketch.w_prime());
    const auto v = sketch.values();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
    if (!out) throw std::runtime_error("failed writing sketch");
}

Sketch read_sketch_binary(std::istream& in) {
    auto get = [&]() {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!in) throw std::runtime_error("truncated sketch header");
        return v;
    };
    const std::uint64_t s = get();
    if (s == 0 || s > 1024) throw std::runtime_error("implausible sketch row count");
    std::vector<std::uint64_t> sizes;
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < s; ++i) {
        sizes.push_back(get());
        total += sizes.back();
    }
    const std::uint64_t w_prime = get();
    if (w_prime == 0 || w_prime > 4096 || total * w_prime * w_prime > (std::uint64_t{1} << 32U)) {
        throw std::runtime_error("implausible sketch dimensions");
    }
    Sketch sketch(w_prime, std::move(sizes));
    auto v = sketch.values();
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
    if (!in) throw std::runtime_error("truncated sketch payload");
    return sketch;
}

void write_explicit_matrix(std::ostream& out, const MeasurementPlan& plan, std::uint64_t max_cells) {
    if (plan.cells() > max_cells) {
        throw std::invalid_argument("explicit matrix is limited to " + std::to_string(max_cells) + " cells");
    }
    const GridView& grid = plan.grid();
    const std::size_t n = grid.n;
    const std::size_t bp = plan.w_prime() * plan.w_prime();
    std::vector<std::vector<std::size_t>> columns(measurement_count(plan));
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            const auto sym = plan.symbols(grid.cell_of(x, y));
            const std::size_t off = grid.local_offset(x, y);
            for (unsigned i = 0; i < plan.rows(); ++i) {
                columns[(plan.row_offset(i) + sym[i]) * bp + off].push_back(x * n + y);
            }
        }
    }
    std::string line(2 * n * n, ',');
    for (const auto& cols : columns) {
        for (std::size_t c = 0; c < n * n; ++c) line[2 * c] = '0';
        for (auto c : cols) line[2 * c] = '1';
        line[2 * n * n - 1] = '\n';
        out << line;
    }
}

// ---------------------------------------------------------------------------

FoldPlan FoldPlan::make(std::size_t p1, std::size_t p2, std::size_t n) {
    if (p1 == 0 || p2 == 0) throw std::invalid_argument("fold moduli must be positive");
    if (std::gcd(p1, p2) != 1) {
        throw std::invalid_argument("fold moduli " + std::to_string(p1) + " and " + std::to_string(p2) +
                                    " are not coprime");
    }
    if (p1 * p2 < n) {
        throw std::invalid_argument("fold moduli product " + std::to_string(p1 * p2) + " is below n = " +
                                    std::to_string(n));
    }
    return FoldPlan{p1, p2};
}

std::size_t FoldPlan::modulus(int which) const {
    if (which == 1) return p1;
    if (which == 2) return p2;
    throw std::invalid_argument("fold index must be 1 or 2");
}

Image fold2d(const Image& image, std::size_t p) {
    if (p == 0) throw std::invalid_argument("fold modulus must be positive");
    Image out(p);
    for (std::size_t x = 0; x < image.rows(); ++x) {
        const std::size_t fx = x % p;
        for (std::size_t y = 0; y < image.cols(); ++y) out.at(fx, y % p) += image.at(x, y);
    }
    return out;
}

Image fold2d(const Image& image, const FoldPlan& plan, int which) { return fold2d(image, plan.modulus(which)); }

std::uint64_t measurement_count(const FoldPlan& plan) {
    return static_cast<std::uint64_t>(plan.p1) * plan.p1 + static_cast<std::uint64_t>(plan.p2) * plan.p2;
}

}  // namespace locsketch
