#include "locsketch/recovery.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

namespace locsketch {

HeavySet find_heavy(const Sketch& sketch, double T, const FeatureNorm& norm) {
    if (!(T > 0.0)) throw std::invalid_argument("find_heavy: T must be positive");
    HeavySet heavy;
    heavy.threshold = T / 2.0;
    for (unsigned i = 0; i < sketch.rows(); ++i) {
        for (std::uint64_t j = 0; j < sketch.row_sizes()[i]; ++j) {
            const FeatureVector f = feature(sketch.bucket(i, j), sketch.w_prime());
            if (norm.magnitude(f) >= heavy.threshold) heavy.entries.push_back({i, j, f});
        }
    }
    return heavy;
}

KCenterResult kcenter_outliers(std::span<const FeatureVector> points, std::size_t k, double r_guess,
                               const FeatureNorm& norm, double expansion) {
    if (!(r_guess > 0.0)) throw std::invalid_argument("kcenter_outliers: radius guess must be positive");
    const std::size_t count = points.size();
    std::vector<std::vector<std::size_t>> near(count), far(count);
    for (std::size_t a = 0; a < count; ++a) {
        for (std::size_t b = 0; b < count; ++b) {
            const double d = feature_distance(points[a], points[b], norm);
            if (d <= r_guess) near[a].push_back(b);
            if (d <= expansion * r_guess) far[a].push_back(b);
        }
    }
    KCenterResult result;
    result.assignment.assign(count, -1);
    std::vector<bool> covered(count, false);
    for (std::size_t round = 0; round < k; ++round) {
        std::size_t best = count;
        std::size_t best_count = 0;
        for (std::size_t p = 0; p < count; ++p) {
            if (covered[p]) continue;
            std::size_t c = 0;
            for (auto q : near[p]) c += covered[q] ? 0 : 1;
            if (best == count || c > best_count || (c == best_count && points[p].mass > points[best].mass)) {
                best = p;
                best_count = c;
            }
        }
        if (best == count) break;
        const int id = static_cast<int>(result.centers.size());
        result.centers.push_back(best);
        for (auto q : far[best]) {
            if (!covered[q]) {
                covered[q] = true;
                result.assignment[q] = id;
            }
        }
    }
    return result;
}

ClusterPartition cluster_heavy(const HeavySet& heavy, std::size_t k, double T, const FeatureNorm& norm,
                               double outlier_budget) {
    std::vector<FeatureVector> points;
    points.reserve(heavy.entries.size());
    for (const auto& e : heavy.entries) points.push_back(e.feature);
    const KCenterResult kc = kcenter_outliers(points, k, T / 12.0, norm, 3.0);
    ClusterPartition part;
    part.outlier_budget = outlier_budget;
    part.clusters.resize(kc.centers.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        if (kc.assignment[p] < 0) part.outliers.push_back(p);
        else part.clusters[static_cast<std::size_t>(kc.assignment[p])].push_back(p);
    }
    return part;
}

std::vector<Codeword> build_codewords(const ClusterPartition& partition, const HeavySet& heavy, unsigned s,
                                      std::size_t k) {
    std::vector<Codeword> words(k, Codeword{std::vector<std::optional<Symbol>>(s)});
    for (std::size_t l = 0; l < partition.clusters.size() && l < k; ++l) {
        auto& sym = words[l].symbols;
        for (auto idx : partition.clusters[l]) {
            const auto& e = heavy.entries[idx];
            if (e.row >= s) throw std::invalid_argument("heavy entry row outside the code length");
            const auto j = static_cast<Symbol>(e.bucket);
            if (!sym[e.row] || j < *sym[e.row]) sym[e.row] = j;
        }
    }
    return words;
}

std::size_t RecoveryResult::count_in(std::span<const std::uint64_t> sorted_cells) const {
    std::size_t hits = 0;
    for (const auto& [cell, mult] : cells) {
        if (std::binary_search(sorted_cells.begin(), sorted_cells.end(), cell)) ++hits;
    }
    return hits;
}

namespace {

struct Steps {
    HeavySet heavy;
    ClusterPartition partition;
    std::vector<Codeword> words;
};

Steps run_steps(const Sketch& sketch, const MeasurementPlan& plan, std::size_t k, double T, const FeatureNorm& norm,
                const Constants& constants) {
    if (sketch.row_sizes() != plan.row_sizes() || sketch.w_prime() != plan.w_prime()) {
        throw std::invalid_argument("sketch layout does not match the plan");
    }
    Steps st;
    st.heavy = find_heavy(sketch, T, norm);
    const double budget = constants.delta() * plan.rows() * static_cast<double>(k);
    st.partition = cluster_heavy(st.heavy, k, T, norm, budget);
    st.words = build_codewords(st.partition, st.heavy, plan.rows(), k);
    return st;
}

unsigned disagreements(const Codeword& word, std::span<const Symbol> truth) {
    unsigned d = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (word.symbols[i] && *word.symbols[i] != truth[i]) ++d;
    }
    return d;
}

}  // namespace

RecoveryResult recover(const Sketch& sketch, const MeasurementPlan& plan, std::size_t k, double T,
                       const FeatureNorm& norm, const Constants& constants) {
    Steps st = run_steps(sketch, plan, k, T, norm, constants);
    RecoveryResult result;
    result.heavy = st.heavy.entries.size();
    result.outliers = st.partition.outliers.size();
    result.outlier_budget_exceeded = st.partition.outlier_budget_exceeded();
    std::map<std::uint64_t, std::size_t> unique;
    for (std::size_t l = 0; l < st.words.size(); ++l) {
        ClusterDecode d;
        d.cluster = l;
        d.word = std::move(st.words[l]);
        d.erasures = static_cast<unsigned>(d.word.erasures());
        if (d.erasures < plan.rows()) d.cell = plan.code().decode(d.word);
        d.valid = d.cell && *d.cell < plan.cells();
        if (d.valid) {
            d.errors = disagreements(d.word, plan.symbols(*d.cell));
            ++unique[*d.cell];
        }
        result.decodes.push_back(std::move(d));
    }
    result.cells.assign(unique.begin(), unique.end());
    return result;
}

void write_recovery_csv(std::ostream& out, const RecoveryResult& result) {
    out << "cluster,cell,valid,errors,erasures\n";
    for (const auto& d : result.decodes) {
        out << d.cluster << ',';
        if (d.cell) out << *d.cell;
        else out << "NA";
        out << ',' << (d.valid ? 1 : 0) << ',';
        if (d.valid) out << d.errors;
        else out << "NA";
        out << ',' << d.erasures << '\n';
    }
}

Image estimate_cell_contents(const Sketch& sketch, const MeasurementPlan& plan, std::uint64_t cell) {
    const auto sym = plan.symbols(cell);
    const std::size_t wp = plan.w_prime();
    Image out(wp);
    std::vector<double> column(sym.size());
    for (std::size_t p = 0; p < wp * wp; ++p) {
        for (unsigned i = 0; i < sym.size(); ++i) column[i] = sketch.bucket(i, sym[i])[p];
        std::sort(column.begin(), column.end());
        const std::size_t mid = column.size() / 2;
        out.pixels()[p] = column.size() % 2 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
    }
    return out;
}

Diagnostics diagnose(const Sketch& sketch, const MeasurementPlan& plan, const Image& clean, const GridView& grid,
                     std::size_t k, double T, const FeatureNorm& norm, const Constants& constants) {
    Diagnostics diag;
    diag.full_cells = grid.full_cells.size();
    diag.touched_cells = grid.touched_cells.size();
    const unsigned s = plan.rows();

    // (row, bucket) pairs hit by each cell of S'.
    std::map<std::pair<unsigned, std::uint64_t>, std::size_t> load;
    for (auto c : grid.touched_cells) {
        const auto sym = plan.symbols(c);
        for (unsigned i = 0; i < s; ++i) ++load[{i, sym[i]}];
    }
    std::set<std::pair<unsigned, std::uint64_t>> preserved;
    for (auto c : grid.full_cells) {
        const FeatureVector truth = feature(grid.extract(clean, c));
        const auto sym = plan.symbols(c);
        for (unsigned i = 0; i < s; ++i) {
            if (load[{i, sym[i]}] != 1) continue;
            const FeatureVector seen = feature(sketch.bucket(i, sym[i]), sketch.w_prime());
            if (feature_distance(seen, truth, norm) <= T / 24.0) preserved.insert({i, sym[i]});
        }
    }
    diag.preserved = preserved.size();

    const Steps st = run_steps(sketch, plan, k, T, norm, constants);
    diag.heavy = st.heavy.entries.size();
    diag.outliers = st.partition.outliers.size();
    for (const auto& e : st.heavy.entries) {
        if (!preserved.count({e.row, e.bucket})) ++diag.heavy_not_preserved;
    }
    for (const auto& word : st.words) {
        diag.erasures += word.erasures();
        const std::size_t filled = s - word.erasures();
        std::size_t best_agree = 0;
        for (auto c : grid.full_cells) {
            best_agree = std::max<std::size_t>(best_agree, filled - disagreements(word, plan.symbols(c)));
        }
        diag.errors += filled - best_agree;
    }
    diag.correct = recover(sketch, plan, k, T, norm, constants).count_in(grid.full_cells);
    return diag;
}

}  // namespace locsketch
