#ifndef ASNN_GRID_HPP
#define ASNN_GRID_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace asnn {

/**
 * Uniform space-time discretization. Cell (i, j) covers
 * [x0 + i*dx, x0 + (i+1)*dx) x [t0 + j*dt, t0 + (j+1)*dt); the last cell
 * along each axis also owns the closing boundary.
 *
 * All quantities are SI: metres and seconds.
 */
struct Grid {
    double x0 = 0.0;
    double dx = 1.0;
    std::size_t nx = 1;
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t nt = 1;

    Grid() = default;
    Grid(double x0_, double dx_, std::size_t nx_, double t0_, double dt_, std::size_t nt_);

    std::size_t cells() const { return nx * nt; }
    double x_center(std::size_t i) const { return x0 + (static_cast<double>(i) + 0.5) * dx; }
    double t_center(std::size_t j) const { return t0 + (static_cast<double>(j) + 0.5) * dt; }
    double x_end() const { return x0 + static_cast<double>(nx) * dx; }
    double t_end() const { return t0 + static_cast<double>(nt) * dt; }

    bool contains(double x, double t) const;

    /// Index of the cell holding (x, t), or nullopt when outside the extent.
    std::optional<std::pair<std::size_t, std::size_t>> cell_of(double x, double t) const;

    bool operator==(const Grid&) const = default;
};

enum class Quantity { speed, density };

/// Dense nx-by-nt matrix over a Grid, stored row-major (space is the row).
class Field {
public:
    Field() = default;
    Field(Grid grid, Quantity quantity, double fill = 0.0);
    Field(Grid grid, Quantity quantity, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    Quantity quantity() const { return quantity_; }

    double& operator()(std::size_t i, std::size_t j) { return values_[i * grid_.nt + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * grid_.nt + j]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    double min() const;
    double max() const;

    bool operator==(const Field&) const = default;

private:
    Grid grid_;
    Quantity quantity_ = Quantity::speed;
    std::vector<double> values_;
};

struct Observation {
    double x = 0.0;      // m
    double t = 0.0;      // s
    double value = 0.0;  // m/s
};

enum class Source : std::uint8_t { detector, floating_car };

/// Scattered measurements with a source tag per entry.
class ObservationSet {
public:
    ObservationSet() = default;
    explicit ObservationSet(std::vector<Observation> obs, Source source = Source::detector);

    void add(const Observation& o, Source s = Source::detector);
    void append(const ObservationSet& other);

    std::span<const Observation> observations() const { return obs_; }
    std::span<const Source> sources() const { return sources_; }
    const Observation& operator[](std::size_t k) const { return obs_[k]; }
    std::size_t size() const { return obs_.size(); }
    bool empty() const { return obs_.empty(); }

    double min_value() const;
    double max_value() const;
    double mean_value() const;

    /// Observations outside `grid` are dropped; those on the closing
    /// boundary stay (they bin into the last cell).
    ObservationSet clipped_to(const Grid& grid) const;

private:
    std::vector<Observation> obs_;
    std::vector<Source> sources_;
};

class Mask {
public:
    Mask() = default;
    explicit Mask(Grid grid);

    const Grid& grid() const { return grid_; }
    bool operator()(std::size_t i, std::size_t j) const { return bits_[i * grid_.nt + j] != 0; }
    void set(std::size_t i, std::size_t j, bool on = true) { bits_[i * grid_.nt + j] = on ? 1 : 0; }
    std::span<const std::uint8_t> bits() const { return bits_; }
    std::size_t count() const;

    Mask operator|(const Mask& other) const;
    bool operator==(const Mask&) const = default;

private:
    Grid grid_;
    std::vector<std::uint8_t> bits_;
};

struct Rasterized {
    Field field;
    Mask mask;
};

/// Bins observations into cells, averaging those that share a cell.
/// Throws DataError when no observation falls inside the grid.
Rasterized rasterize(const ObservationSet& obs, const Grid& grid);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

// Unit handling. Everything internal is SI.
enum class SpeedUnit { kmh, ms };

double convert_speed(double value, SpeedUnit from, SpeedUnit to);
inline double kmh(double v) { return convert_speed(v, SpeedUnit::kmh, SpeedUnit::ms); }
inline double per_km(double v) { return v / 1000.0; }  // veh/km -> veh/m

}  // namespace asnn

#endif  // ASNN_GRID_HPP
