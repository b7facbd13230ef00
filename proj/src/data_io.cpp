#include "asnn/data_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "asnn/errors.hpp"

namespace asnn {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

double parse_double(std::string_view s, const char* what) {
    double v = 0.0;
    const std::string t = trim(s);
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (!t.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw DataError(std::string("cannot parse ") + what + " from '" + t + "'");
    return v;
}

double time_unit(const std::string& u) {
    static const std::map<std::string, double> units = {{"s", 1.0}, {"ms", 1e-3}, {"min", 60.0}};
    if (auto it = units.find(u); it != units.end()) return it->second;
    throw ConfigError("unknown time unit '" + u + "'");
}

double position_unit(const std::string& u) {
    static const std::map<std::string, double> units = {
        {"m", 1.0}, {"km", 1000.0}, {"ft", 0.3048}, {"mi", 1609.344}};
    if (auto it = units.find(u); it != units.end()) return it->second;
    throw ConfigError("unknown position unit '" + u + "'");
}

double speed_unit(const std::string& u) {
    static const std::map<std::string, double> units = {
        {"m/s", 1.0}, {"km/h", 1000.0 / 3600.0}, {"ft/s", 0.3048}, {"mph", 1609.344 / 3600.0}};
    if (auto it = units.find(u); it != units.end()) return it->second;
    throw ConfigError("unknown speed unit '" + u + "'");
}

void apply_unit_line(const std::string& line, ColumnMap& cols) {
    std::istringstream ss(line.substr(line.find(':') + 1));
    std::string token;
    while (ss >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw ConfigError("malformed unit declaration '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string unit = token.substr(eq + 1);
        if (key == "time")
            cols.time_scale = time_unit(unit);
        else if (key == "position")
            cols.position_scale = position_unit(unit);
        else if (key == "speed")
            cols.speed_scale = speed_unit(unit);
        else
            throw ConfigError("unknown unit key '" + key + "'");
    }
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

ColumnMap ColumnMap::ngsim() {
    ColumnMap m;
    m.vehicle_id = "Vehicle_ID";
    m.time = "Global_Time";
    m.position = "Local_Y";
    m.speed = "v_Vel";
    m.time_scale = 1e-3;
    m.position_scale = 0.3048;
    m.speed_scale = 0.3048;
    return m;
}

ColumnMap ColumnMap::highd(double frame_rate) {
    if (!(frame_rate > 0.0)) throw ConfigError("frame rate must be positive");
    ColumnMap m;
    m.vehicle_id = "id";
    m.time = "frame";
    m.position = "x";
    m.speed = "xVelocity";
    m.time_scale = 1.0 / frame_rate;
    m.absolute_speed = true;
    return m;
}

std::vector<TrajectoryRecord> parse_trajectories(std::istream& in, ColumnMap cols) {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (t.find("units:") != std::string::npos) apply_unit_line(t, cols);
            continue;
        }
        header = split(t, cols.delimiter);
        break;
    }
    if (header.empty()) throw DataError("trajectory file has no header");

    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("trajectory file lacks column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_id = column(cols.vehicle_id);
    const std::size_t c_t = column(cols.time);
    const std::size_t c_x = column(cols.position);
    const std::size_t c_v = column(cols.speed);
    const std::size_t needed = std::max({c_id, c_t, c_x, c_v}) + 1;

    std::vector<TrajectoryRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cells = split(t, cols.delimiter);
        if (cells.size() < needed)
            throw DataError("trajectory line " + std::to_string(line_no) + " has too few columns");
        TrajectoryRecord r;
        r.vehicle_id = cells[c_id];
        r.t = parse_double(cells[c_t], "time") * cols.time_scale;
        r.x = parse_double(cells[c_x], "position") * cols.position_scale;
        r.v = parse_double(cells[c_v], "speed") * cols.speed_scale;
        if (cols.absolute_speed) r.v = std::abs(r.v);
        if (r.v < 0.0) throw DataError("negative speed on trajectory line " + std::to_string(line_no));
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<TrajectoryRecord> read_trajectories(const std::filesystem::path& path,
                                                const ColumnMap& columns) {
    auto in = open_in(path);
    try {
        return parse_trajectories(in, columns);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_trajectories(const std::filesystem::path& path,
                        const std::vector<TrajectoryRecord>& records) {
    auto out = open_out(path);
    out << "# units: time=s position=m speed=m/s\n";
    out << "vehicle_id,time,position,speed\n";
    for (const auto& r : records)
        out << r.vehicle_id << ',' << format_double(r.t) << ',' << format_double(r.x) << ','
            << format_double(r.v) << '\n';
    check_written(out, path);
}

std::vector<TrajectoryRecord> clip_records(const std::vector<TrajectoryRecord>& records,
                                           const Grid& grid) {
    std::vector<TrajectoryRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [&](const auto& r) { return grid.contains(r.x, r.t); });
    return out;
}

GroundTruth build_ground_truth(const std::vector<TrajectoryRecord>& records, const Grid& grid) {
    if (records.empty()) throw DataError("no trajectory records");
    std::vector<double> sum(grid.cells(), 0.0);
    std::vector<std::size_t> count(grid.cells(), 0);
    for (const auto& r : records) {
        auto cell = grid.cell_of(r.x, r.t);
        if (!cell) continue;
        const std::size_t k = cell->first * grid.nt + cell->second;
        sum[k] += r.v;
        ++count[k];
    }
    if (std::all_of(count.begin(), count.end(), [](std::size_t c) { return c == 0; }))
        throw DataError("ground truth: every cell is empty");

    GroundTruth gt{Field(grid, Quantity::speed), 0};
    std::vector<bool> row_has_data(grid.nx, false);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        std::vector<std::size_t> filled;
        for (std::size_t j = 0; j < grid.nt; ++j) {
            const std::size_t k = i * grid.nt + j;
            if (count[k] == 0) continue;
            gt.field(i, j) = sum[k] / static_cast<double>(count[k]);
            filled.push_back(j);
        }
        if (filled.empty()) continue;
        row_has_data[i] = true;
        // nearest observed column along time; ties go to the earlier one
        std::size_t next = 0;
        for (std::size_t j = 0; j < grid.nt; ++j) {
            while (next < filled.size() && filled[next] < j) ++next;
            if (next < filled.size() && filled[next] == j) continue;
            std::size_t src;
            if (next == 0)
                src = filled.front();
            else if (next == filled.size())
                src = filled.back();
            else
                src = (j - filled[next - 1] <= filled[next] - j) ? filled[next - 1] : filled[next];
            gt.field(i, j) = gt.field(i, src);
            ++gt.filled_cells;
        }
    }
    for (std::size_t i = 0; i < grid.nx; ++i) {
        if (row_has_data[i]) continue;
        std::size_t best = grid.nx;
        for (std::size_t d = 1; d < grid.nx && best == grid.nx; ++d) {
            if (d <= i && row_has_data[i - d])
                best = i - d;
            else if (i + d < grid.nx && row_has_data[i + d])
                best = i + d;
        }
        for (std::size_t j = 0; j < grid.nt; ++j) gt.field(i, j) = gt.field(best, j);
        gt.filled_cells += grid.nt;
    }
    return gt;
}

std::vector<TrajectoryRecord> synthesize_trajectories(const Field& speed, std::size_t vehicles,
                                                      double record_period) {
    if (vehicles == 0) throw ConfigError("need at least one vehicle");
    if (!(record_period > 0.0)) throw ConfigError("record period must be positive");
    const Grid& g = speed.grid();
    const double span = g.t_end() - g.t0;
    const double length = g.x_end() - g.x0;
    const double h = std::min(record_period, g.dt) / 4.0;
    // Part of the fleet is already on the road at t0, the rest enters at x0.
    double mean_speed = 0.0;
    for (double v : speed.values()) mean_speed += v;
    mean_speed /= static_cast<double>(speed.size());
    const auto on_road = static_cast<std::size_t>(
        std::floor(static_cast<double>(vehicles) * length / (length + mean_speed * span)));
    const std::size_t entering = vehicles - on_road;
    std::vector<TrajectoryRecord> out;
    for (std::size_t k = 0; k < vehicles; ++k) {
        const std::string id = "veh" + std::to_string(k);
        double t = g.t0;
        double x = g.x0;
        if (k < on_road)
            x = g.x_end() - length * (static_cast<double>(k) + 1.0) / static_cast<double>(on_road);
        else
            t = g.t0 + span * static_cast<double>(k - on_road) / static_cast<double>(entering);
        double next_record = t;
        while (t < g.t_end() && x < g.x_end()) {
            const auto cell = g.cell_of(x, t);
            if (!cell) break;
            const double v = speed(cell->first, cell->second);
            if (t >= next_record) {
                out.push_back({id, t, x, v});
                next_record += record_period;
            }
            x += v * h;
            t += h;
        }
    }
    return out;
}

std::vector<double> evenly_spaced_positions(const Grid& grid, std::size_t n) {
    if (n == 0) throw ConfigError("need at least one detector");
    const double length = grid.x_end() - grid.x0;
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = grid.x0 + (static_cast<double>(k) + 0.5) * length / static_cast<double>(n);
    return out;
}

std::vector<double> detector_positions(const Grid& grid, const SamplingSpec& spec) {
    auto pos = spec.detector_positions.empty() ? evenly_spaced_positions(grid, spec.detector_count)
                                               : spec.detector_positions;
    for (double x : pos)
        if (!(x >= grid.x0 && x <= grid.x_end()))
            throw ConfigError("detector at " + std::to_string(x) + " m lies outside the road");
    return pos;
}

ObservationSet sample_detectors(const Field& truth, const SamplingSpec& spec) {
    const Grid& g = truth.grid();
    const double period = spec.detector_period > 0.0 ? spec.detector_period : g.dt;
    const auto positions = detector_positions(g, spec);
    ObservationSet obs;
    for (double x : positions) {
        for (std::size_t p = 0;; ++p) {
            const double t = g.t0 + (static_cast<double>(p) + 0.5) * period;
            if (!(t < g.t_end())) break;
            const auto cell = g.cell_of(x, t);
            obs.add({x, t, truth(cell->first, cell->second)}, Source::detector);
        }
    }
    return obs;
}

std::vector<std::string> select_vehicles(std::vector<std::string> ids, double fraction,
                                         std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fcd fraction must lie in (0, 1]");
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) throw DataError("no vehicles to sample");
    const auto n = ids.size();
    // ceil() guarded against representation error, e.g. 0.05 * 200.
    const double want = fraction * static_cast<double>(n);
    auto take = static_cast<std::size_t>(std::ceil(want - 1e-9 * want));
    take = std::clamp<std::size_t>(take, 1, n);
    // Partial Fisher-Yates driven directly by mt19937_64 output so the
    // selection is identical across standard libraries.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(take);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ObservationSet sample_fcd(const std::vector<TrajectoryRecord>& records, const SamplingSpec& spec) {
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.vehicle_id);
    const auto chosen = select_vehicles(std::move(ids), spec.fcd_fraction, spec.seed);
    const std::set<std::string> keep(chosen.begin(), chosen.end());
    ObservationSet obs;
    for (const auto& r : records)
        if (keep.count(r.vehicle_id)) obs.add({r.x, r.t, r.v}, Source::floating_car);
    return obs;
}

ObservationSet sample_hybrid(const Field& truth, const std::vector<TrajectoryRecord>& records,
                             const SamplingSpec& spec) {
    ObservationSet obs = sample_detectors(truth, spec);
    obs.append(sample_fcd(records, spec));
    return obs;
}

void write_observations(const std::filesystem::path& path, const ObservationSet& obs) {
    auto out = open_out(path);
    out << "x,t,value,source\n";
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const auto& o = obs[k];
        out << format_double(o.x) << ',' << format_double(o.t) << ',' << format_double(o.value) << ','
            << (obs.sources()[k] == Source::detector ? "detector" : "floating_car") << '\n';
    }
    check_written(out, path);
}

ObservationSet read_observations(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty observation file");
    ObservationSet obs;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() < 3) throw DataError(path.string() + ": malformed observation line");
        Source src = Source::detector;
        if (cells.size() > 3 && cells[3] == "floating_car") src = Source::floating_car;
        const Observation o{parse_double(cells[0], "x"), parse_double(cells[1], "t"),
                            parse_double(cells[2], "value")};
        if (o.value < 0.0) throw DataError(path.string() + ": negative observation value");
        obs.add(o, src);
    }
    if (obs.empty()) throw DataError(path.string() + ": no observations");
    return obs;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw IoError("number formatting failed");
    return std::string(buf, ptr);
}

void write_field_csv(std::ostream& out, const Field& field) {
    const Grid& g = field.grid();
    out << "# asnn-field quantity=" << (field.quantity() == Quantity::speed ? "speed" : "density")
        << " x0=" << format_double(g.x0) << " dx=" << format_double(g.dx) << " nx=" << g.nx
        << " t0=" << format_double(g.t0) << " dt=" << format_double(g.dt) << " nt=" << g.nt << '\n';
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.nt; ++j) {
            if (j) out << ',';
            out << format_double(field(i, j));
        }
        out << '\n';
    }
}

Field read_field_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# asnn-field", 0) != 0)
        throw DataError("field file lacks the '# asnn-field' header");
    std::map<std::string, std::string> meta;
    std::istringstream ss(line.substr(12));
    std::string token;
    while (ss >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) meta[token.substr(0, eq)] = token.substr(eq + 1);
    }
    auto get = [&](const char* key) {
        auto it = meta.find(key);
        if (it == meta.end()) throw DataError(std::string("field header lacks '") + key + "'");
        return it->second;
    };
    const Grid grid(parse_double(get("x0"), "x0"), parse_double(get("dx"), "dx"),
                    static_cast<std::size_t>(parse_double(get("nx"), "nx")),
                    parse_double(get("t0"), "t0"), parse_double(get("dt"), "dt"),
                    static_cast<std::size_t>(parse_double(get("nt"), "nt")));
    const Quantity q = get("quantity") == "density" ? Quantity::density : Quantity::speed;
    std::vector<double> values;
    values.reserve(grid.cells());
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != grid.nt)
            throw ShapeError("field row " + std::to_string(rows) + " has " +
                             std::to_string(cells.size()) + " values, expected " +
                             std::to_string(grid.nt));
        for (const auto& c : cells) values.push_back(parse_double(c, "field value"));
        ++rows;
    }
    if (rows != grid.nx) throw ShapeError("field has " + std::to_string(rows) + " rows, expected " +
                                          std::to_string(grid.nx));
    return Field(grid, q, std::move(values));
}

void write_pgm(std::ostream& out, const Field& field, double scale_max) {
    if (!(scale_max > 0.0)) throw ConfigError("heatmap scale must be positive");
    const Grid& g = field.grid();
    out << "P5\n# scale_max=" << format_double(scale_max) << '\n'
        << g.nt << ' ' << g.nx << "\n255\n";
    std::vector<unsigned char> row(g.nt);
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.nt; ++j) {
            const double s = std::clamp(field(i, j) / scale_max, 0.0, 1.0);
            row[j] = static_cast<unsigned char>(std::lround(s * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
}

void export_field(const Field& field, const std::filesystem::path& path, FieldFormat format,
                  double scale_max) {
    auto out = open_out(path);
    if (format == FieldFormat::csv_grid)
        write_field_csv(out, field);
    else
        write_pgm(out, field, scale_max);
    check_written(out, path);
}

Field import_field(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_field_csv(in);
    } catch (const Error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string file_digest(const std::filesystem::path& path) {
    auto in = open_in(path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw IoError("cannot allocate digest context");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof(buf));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int k = 0; k < len; ++k)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
    return hex.str();
}

}  // namespace asnn
