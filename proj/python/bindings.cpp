#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <stdexcept>
#include <vector>

#include "locsketch/aduaf.hpp"
#include "locsketch/codes.hpp"
#include "locsketch/measurement.hpp"
#include "locsketch/pipeline.hpp"
#include "locsketch/startracker.hpp"

namespace py = pybind11;
using namespace locsketch;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw std::invalid_argument("expected a square 2-D array");
    Image img(static_cast<std::size_t>(a.shape(0)));
    std::memcpy(img.pixels().data(), a.data(), img.size() * sizeof(double));
    return img;
}

Array to_array(const Image& img) {
    Array out({img.rows(), img.cols()});
    std::memcpy(out.mutable_data(), img.pixels().data(), img.size() * sizeof(double));
    return out;
}

Array rows_of(const std::vector<std::array<double, 3>>& rows) {
    Array out({rows.size(), std::size_t{3}});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) m(i, j) = rows[i][j];
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "locsketch C++ core";

    m.def("fold", [](const Array& image, std::size_t p) { return to_array(fold2d(to_image(image), p)); },
          py::arg("image"), py::arg("p"), "Sum a square image over congruence classes mod p in each axis.");

    m.def(
        "aduaf_recover",
        [](const Array& z1, const Array& z2, std::size_t n, std::size_t cells_per_fold, std::size_t max_pairs,
           double mass_tol, double centroid_tol, double merge_radius) {
            AduafConfig c;
            const Image a = to_image(z1), b = to_image(z2);
            c.n = n;
            c.p1 = a.rows();
            c.p2 = b.rows();
            c.cells_per_fold = cells_per_fold;
            c.max_pairs = max_pairs;
            c.mass_tol = mass_tol;
            c.centroid_tol = centroid_tol;
            c.merge_radius = merge_radius;
            std::vector<std::array<double, 3>> rows;
            for (const auto& s : aduaf_recover(a, b, c)) rows.push_back({s.x, s.y, s.mass});
            return rows_of(rows);
        },
        py::arg("z1"), py::arg("z2"), py::arg("n") = 800, py::arg("cells_per_fold") = 30, py::arg("max_pairs") = 24,
        py::arg("mass_tol") = 0.25, py::arg("centroid_tol") = 0.5, py::arg("merge_radius") = 1.5,
        "Recover star positions from two folds; rows are (x, y, mass), heaviest first.");

    m.def(
        "rs_encode",
        [](std::uint64_t q, unsigned r, unsigned s, std::uint64_t x) { return rs_encode(RsCodeSpec::make(q, r, s), x); },
        py::arg("q"), py::arg("r"), py::arg("s"), py::arg("x"));
    m.def(
        "rs_decode",
        [](std::uint64_t q, unsigned r, unsigned s, const std::vector<Symbol>& word) {
            return rs_decode(RsCodeSpec::make(q, r, s), word);
        },
        py::arg("q"), py::arg("r"), py::arg("s"), py::arg("word"));
    m.def(
        "crt_encode",
        [](const std::vector<std::uint64_t>& moduli, unsigned r, std::uint64_t prime, std::uint64_t x) {
            return crt_encode(CrtCodeSpec::make(moduli, moduli.front(), r, prime), x);
        },
        py::arg("moduli"), py::arg("r"), py::arg("prime"), py::arg("x"));
    m.def(
        "crt_decode",
        [](const std::vector<std::uint64_t>& moduli, unsigned r, std::uint64_t prime, const std::vector<Symbol>& word) {
            return crt_decode(CrtCodeSpec::make(moduli, moduli.front(), r, prime), word);
        },
        py::arg("moduli"), py::arg("r"), py::arg("prime"), py::arg("word"));

    m.def(
        "generate_catalog",
        [](std::uint64_t seed, std::size_t count, double exponent) {
            Rng rng(seed);
            std::vector<std::array<double, 3>> rows;
            for (const auto& s : generate_catalog(rng, count, exponent).stars) rows.push_back({s.ra, s.dec, s.mass});
            return rows_of(rows);
        },
        py::arg("seed"), py::arg("count"), py::arg("exponent") = -1.17, "Rows are (ra, dec, mass).");

    m.def(
        "theory_trial",
        [](std::uint64_t seed, std::uint64_t trial, std::size_t n, std::size_t w, std::size_t w_prime, std::size_t k,
           const std::string& code, std::optional<std::uint64_t> q, std::optional<unsigned> s,
           std::optional<unsigned> r, double noise_fraction) {
            TheoryTrialConfig cfg;
            cfg.model = ModelConfig{n, w, w_prime, k};
            cfg.kind = parse_code_kind(code);
            cfg.q = q;
            cfg.s = s;
            cfg.r = r;
            cfg.noise_fraction = noise_fraction;
            const auto res = run_theory_trial(cfg, seed, trial);
            const auto& d = res.diagnostics;
            py::dict out;
            out["T"] = res.T;
            out["noise_norm"] = res.noise_norm;
            out["full_cells"] = d.full_cells;
            out["touched_cells"] = d.touched_cells;
            out["preserved"] = d.preserved;
            out["heavy"] = d.heavy;
            out["heavy_not_preserved"] = d.heavy_not_preserved;
            out["errors"] = d.errors;
            out["erasures"] = d.erasures;
            out["correct"] = d.correct;
            out["success"] = res.success(k);
            return out;
        },
        py::arg("seed"), py::arg("trial") = 0, py::arg("n") = 256, py::arg("w") = 2, py::arg("w_prime") = 8,
        py::arg("k") = 32, py::arg("code") = "crt", py::arg("q") = 256, py::arg("s") = 10, py::arg("r") = 2,
        py::arg("noise_fraction") = 0.5, "One seeded place/measure/recover/diagnose trial.");

    py::register_exception<std::domain_error>(m, "DomainError", PyExc_ValueError);
}
