#include "asnn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "asnn/errors.hpp"

namespace asnn {

Grid::Grid(double x0_, double dx_, std::size_t nx_, double t0_, double dt_, std::size_t nt_)
    : x0(x0_), dx(dx_), nx(nx_), t0(t0_), dt(dt_), nt(nt_) {
    if (!(dx > 0.0) || !(dt > 0.0)) throw DomainError("grid cell sizes must be positive");
    if (nx < 1 || nt < 1) throw DomainError("grid must have at least one cell per axis");
    if (!std::isfinite(x0) || !std::isfinite(t0)) throw DomainError("grid origin must be finite");
}

bool Grid::contains(double x, double t) const {
    return x >= x0 && x <= x_end() && t >= t0 && t <= t_end();
}

namespace {

std::optional<std::size_t> bin(double v, double origin, double step, std::size_t n) {
    const double end = origin + static_cast<double>(n) * step;
    if (!(v >= origin) || v > end) return std::nullopt;
    auto k = static_cast<std::size_t>(std::floor((v - origin) / step));
    return std::min(k, n - 1);
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> Grid::cell_of(double x, double t) const {
    auto i = bin(x, x0, dx, nx);
    auto j = bin(t, t0, dt, nt);
    if (!i || !j) return std::nullopt;
    return std::make_pair(*i, *j);
}

Field::Field(Grid grid, Quantity quantity, double fill)
    : grid_(grid), quantity_(quantity), values_(grid.cells(), fill) {}

Field::Field(Grid grid, Quantity quantity, std::vector<double> values)
    : grid_(grid), quantity_(quantity), values_(std::move(values)) {
    if (values_.size() != grid_.cells())
        throw ShapeError("field values (" + std::to_string(values_.size()) +
                         ") do not match grid cells (" + std::to_string(grid_.cells()) + ")");
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

ObservationSet::ObservationSet(std::vector<Observation> obs, Source source)
    : obs_(std::move(obs)), sources_(obs_.size(), source) {}

void ObservationSet::add(const Observation& o, Source s) {
    obs_.push_back(o);
    sources_.push_back(s);
}

void ObservationSet::append(const ObservationSet& other) {
    obs_.insert(obs_.end(), other.obs_.begin(), other.obs_.end());
    sources_.insert(sources_.end(), other.sources_.begin(), other.sources_.end());
}

double ObservationSet::min_value() const {
    if (obs_.empty()) throw DataError("empty observation set");
    return std::min_element(obs_.begin(), obs_.end(),
                            [](const auto& a, const auto& b) { return a.value < b.value; })
        ->value;
}

double ObservationSet::max_value() const {
    if (obs_.empty()) throw DataError("empty observation set");
    return std::max_element(obs_.begin(), obs_.end(),
                            [](const auto& a, const auto& b) { return a.value < b.value; })
        ->value;
}

double ObservationSet::mean_value() const {
    if (obs_.empty()) throw DataError("empty observation set");
    double s = 0.0;
    for (const auto& o : obs_) s += o.value;
    return s / static_cast<double>(obs_.size());
}

ObservationSet ObservationSet::clipped_to(const Grid& grid) const {
    ObservationSet out;
    for (std::size_t k = 0; k < obs_.size(); ++k)
        if (grid.contains(obs_[k].x, obs_[k].t)) out.add(obs_[k], sources_[k]);
    return out;
}

Mask::Mask(Grid grid) : grid_(grid), bits_(grid.cells(), 0) {}

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask Mask::operator|(const Mask& other) const {
    require_same_grid(grid_, other.grid_, "mask union");
    Mask out(grid_);
    for (std::size_t k = 0; k < bits_.size(); ++k) out.bits_[k] = bits_[k] | other.bits_[k];
    return out;
}

Rasterized rasterize(const ObservationSet& obs, const Grid& grid) {
    if (obs.empty()) throw DataError("empty observation set");
    std::vector<double> sum(grid.cells(), 0.0);
    std::vector<std::size_t> count(grid.cells(), 0);
    for (const auto& o : obs.observations()) {
        auto cell = grid.cell_of(o.x, o.t);
        if (!cell) continue;
        const std::size_t k = cell->first * grid.nt + cell->second;
        sum[k] += o.value;
        ++count[k];
    }
    Rasterized out{Field(grid, Quantity::speed), Mask(grid)};
    bool any = false;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        for (std::size_t j = 0; j < grid.nt; ++j) {
            const std::size_t k = i * grid.nt + j;
            if (count[k] == 0) continue;
            out.field(i, j) = sum[k] / static_cast<double>(count[k]);
            out.mask.set(i, j);
            any = true;
        }
    }
    if (!any) throw DataError("empty rasterization: no observation inside the grid");
    return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw ShapeError(std::string(what) + ": grid mismatch");
}

double convert_speed(double value, SpeedUnit from, SpeedUnit to) {
    if (from == to) return value;
    constexpr double kKmhToMs = 1000.0 / 3600.0;
    return from == SpeedUnit::kmh ? value * kKmhToMs : value / kKmhToMs;
}

}  // namespace asnn
