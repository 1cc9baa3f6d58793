#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pkx {

struct VariogramModel;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Geometry of a regular raster. Values live at cell centres:
// node (ix, iy) sits at origin + (ix + 0.5, iy + 0.5) * cell_size.
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;  // metres
  int nx = 1;
  int ny = 1;

  void validate() const;

  double extent_x() const { return nx * cell_size; }
  double extent_y() const { return ny * cell_size; }
  double node_x(int ix) const { return origin_x + (ix + 0.5) * cell_size; }
  double node_y(int iy) const { return origin_y + (iy + 0.5) * cell_size; }
  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  // Row-major, y-outer.
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(ix);
  }
  bool contains(double x, double y) const {
    return x >= origin_x && x <= origin_x + extent_x() && y >= origin_y &&
           y <= origin_y + extent_y();
  }

  bool operator==(const GridSpec&) const = default;
};

// Ground-truth count-rate surface lambda(x, y) in counts/s, immutable once
// built. Queries between nodes interpolate bilinearly.
struct RateField {
  GridSpec spec;
  std::vector<double> rates;  // spec.size() values, row-major, finite, >= 0

  void validate() const;
};

// One geo-tagged counting observation: `counts` events accumulated over
// `duration` seconds at (x, y). Counts are kept as a double so that
// detector-corrected (non-integer) counts pass through unchanged; raw counts
// are exact integers in that representation.
struct ObservationRecord {
  double x = 0.0;
  double y = 0.0;
  double duration = 0.0;  // seconds, > 0
  double counts = 0.0;    // >= 0

  double rate() const { return counts / duration; }
};

// Throws ValidationError on non-finite coordinates, non-positive durations
// or negative counts; indexes the offending record in the message.
void validate_observations(std::span<const ObservationRecord> obs);

// Piecewise-constant moisture contrast: rate_wet left of border_x, rate_dry
// right of it (assigned per node centre).
RateField make_step_field(const GridSpec& spec, double border_x,
                          double rate_wet, double rate_dry);

// Ordinary-kriging interpolation of sparse observed rates onto `spec`.
// Negative estimates are clamped to zero (clamp count is reported by the
// kriging layer and surfaced in CLI metadata).
RateField build_surrogate_from_observations(
    std::span<const ObservationRecord> obs, const GridSpec& spec,
    const VariogramModel& model);

// Bilinear lookup on cell-centre nodes; queries outside the node lattice but
// inside the field extent clamp to the edge nodes. Exact at nodes.
double bilinear_at(const GridSpec& spec, std::span<const double> values,
                   double x, double y);

// Field rate at a point inside the extent (border inclusive).
double rate_at(const RateField& field, double x, double y);

// CSV with header "x,y,duration_s,counts"; duration must be positive, counts
// a nonnegative integer. Returns records in file order.
std::vector<ObservationRecord> load_observations_csv(const std::string& path);

// Pools records that share an exact location by summing counts and durations
// (counting statistics are additive). Order of first appearance is kept.
std::vector<ObservationRecord> merge_duplicate_locations(
    std::span<const ObservationRecord> obs);

// Replicates a surveyed line into `lines` parallel copies spaced `spacing`
// metres apart in +y (the original is copy 0).
std::vector<ObservationRecord> replicate_transect(
    std::span<const ObservationRecord> transect, int lines, double spacing);

void save_rate_field(const RateField& field, const std::string& path);
RateField load_rate_field(const std::string& path);

}  // namespace pkx
