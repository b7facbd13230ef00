#ifndef ASNN_DATA_IO_HPP
#define ASNN_DATA_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "asnn/grid.hpp"
#include "asnn/lwr.hpp"

namespace asnn {

struct TrajectoryRecord {
    std::string vehicle_id;
    double t = 0.0;  // s
    double x = 0.0;  // m
    double v = 0.0;  // m/s
};

/**
 * Maps the columns of a delimiter-separated trajectory file onto
 * TrajectoryRecord fields and converts their units to SI. A line of the
 * form `# units: time=ms position=ft speed=ft/s` anywhere before the
 * header overrides the scales.
 */
struct ColumnMap {
    std::string vehicle_id = "vehicle_id";
    std::string time = "time";
    std::string position = "position";
    std::string speed = "speed";
    double time_scale = 1.0;      // to s
    double position_scale = 1.0;  // to m
    double speed_scale = 1.0;     // to m/s
    /// Take |speed|; HighD encodes driving direction in the sign.
    bool absolute_speed = false;
    char delimiter = ',';

    static ColumnMap standard() { return {}; }
    /// NGSIM: Vehicle_ID, Global_Time (ms), Local_Y (ft), v_Vel (ft/s).
    static ColumnMap ngsim();
    /// HighD: id, frame (at `frame_rate` Hz), x (m), xVelocity (m/s).
    static ColumnMap highd(double frame_rate = 25.0);
};

std::vector<TrajectoryRecord> parse_trajectories(std::istream& in, ColumnMap columns);
std::vector<TrajectoryRecord> read_trajectories(const std::filesystem::path& path,
                                                const ColumnMap& columns);
void write_trajectories(const std::filesystem::path& path,
                        const std::vector<TrajectoryRecord>& records);

/// Drops records outside the grid's space-time extent.
std::vector<TrajectoryRecord> clip_records(const std::vector<TrajectoryRecord>& records,
                                           const Grid& grid);

struct GroundTruth {
    Field field;
    /// Number of cells that received no record and were filled.
    std::size_t filled_cells = 0;
};

/// Per-cell mean of record speeds. Empty cells take the nearest non-empty
/// cell in time along their row; rows with no data at all copy the nearest
/// row in space. Ties prefer the lower index.
GroundTruth build_ground_truth(const std::vector<TrajectoryRecord>& records, const Grid& grid);

/**
 * Moves `vehicles` virtual probes through a speed field and emits one record
 * every `record_period` seconds until each probe leaves the grid. A share of
 * the fleet proportional to the road length starts evenly spread along the
 * road at t0; the rest enters at x0 at evenly spaced times.
 */
std::vector<TrajectoryRecord> synthesize_trajectories(const Field& speed, std::size_t vehicles,
                                                      double record_period);

enum class SamplingMode { detectors, floating_cars, hybrid };

struct SamplingSpec {
    SamplingMode mode = SamplingMode::detectors;
    /// Explicit detector positions (m); when empty, `detector_count`
    /// detectors are spread evenly with half-gap margins.
    std::vector<double> detector_positions;
    std::size_t detector_count = 4;
    /// Sampling period (s); zero means the grid's dt.
    double detector_period = 0.0;
    double fcd_fraction = 0.05;
    std::uint64_t seed = 1;
};

/// x0 + (k + 1/2) * L / n for k = 0..n-1.
std::vector<double> evenly_spaced_positions(const Grid& grid, std::size_t n);

std::vector<double> detector_positions(const Grid& grid, const SamplingSpec& spec);

/// One observation per detector per period at times t0 + (p + 1/2) period,
/// valued at the truth cell containing the detector at that time.
ObservationSet sample_detectors(const Field& truth, const SamplingSpec& spec);

/// Chooses ceil(fraction * #vehicles) vehicle ids (seeded, platform
/// independent) and emits every record of those vehicles.
ObservationSet sample_fcd(const std::vector<TrajectoryRecord>& records, const SamplingSpec& spec);

/// Union of sample_detectors and sample_fcd.
ObservationSet sample_hybrid(const Field& truth, const std::vector<TrajectoryRecord>& records,
                             const SamplingSpec& spec);

std::vector<std::string> select_vehicles(std::vector<std::string> ids, double fraction,
                                         std::uint64_t seed);

void write_observations(const std::filesystem::path& path, const ObservationSet& obs);
ObservationSet read_observations(const std::filesystem::path& path);

enum class FieldFormat { csv_grid, pgm_heatmap };

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

void write_field_csv(std::ostream& out, const Field& field);
Field read_field_csv(std::istream& in);

/// Binary P5 PGM, one row per space cell and one column per time cell; values
/// are scaled linearly from [0, scale_max] onto [0, 255] and clamped.
void write_pgm(std::ostream& out, const Field& field, double scale_max);

void export_field(const Field& field, const std::filesystem::path& path, FieldFormat format,
                  double scale_max);
Field import_field(const std::filesystem::path& path);

/// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

}  // namespace asnn

#endif  // ASNN_DATA_IO_HPP
