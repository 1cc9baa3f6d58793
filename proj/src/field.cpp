#include "pkx/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pkx/errors.hpp"
#include "pkx/io.hpp"
#include "pkx/kriging.hpp"
#include "pkx/runconfig.hpp"

namespace pkx {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::string strip_cr(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.pop_back();
  return line;
}

double parse_number(const std::string& token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(where + ": cannot parse number \"" + token + "\"");
  return v;
}

long long parse_integer(const std::string& token, const std::string& where) {
  long long v = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(where + ": cannot parse integer \"" + token + "\"");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void validate_observations(std::span<const ObservationRecord> obs) {
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const ObservationRecord& r = obs[i];
    if (!finite(r.x) || !finite(r.y))
      throw ValidationError("observation " + std::to_string(i) +
                            ": non-finite coordinates");
    if (!finite(r.duration) || r.duration <= 0.0)
      throw ValidationError("observation " + std::to_string(i) +
                            ": duration must be > 0");
    if (!finite(r.counts) || r.counts < 0.0)
      throw ValidationError("observation " + std::to_string(i) +
                            ": counts must be >= 0");
  }
}

void GridSpec::validate() const {
  if (!finite(origin_x) || !finite(origin_y))
    throw ValidationError("grid origin must be finite");
  if (!finite(cell_size) || cell_size <= 0.0)
    throw ValidationError("grid cell_size must be > 0");
  if (nx < 1 || ny < 1) throw ValidationError("grid nx and ny must be >= 1");
}

void RateField::validate() const {
  spec.validate();
  if (rates.size() != spec.size())
    throw ValidationError("rate raster has " + std::to_string(rates.size()) +
                          " values, grid expects " +
                          std::to_string(spec.size()));
  for (double r : rates)
    if (!finite(r) || r < 0.0)
      throw ValidationError("rate raster values must be finite and >= 0");
}

RateField make_step_field(const GridSpec& spec, double border_x,
                          double rate_wet, double rate_dry) {
  spec.validate();
  if (!finite(border_x)) throw ValidationError("border_x must be finite");
  if (!finite(rate_wet) || rate_wet < 0.0 || !finite(rate_dry) ||
      rate_dry < 0.0)
    throw ValidationError("plateau rates must be finite and >= 0");
  RateField field;
  field.spec = spec;
  field.rates.resize(spec.size());
  for (int iy = 0; iy < spec.ny; ++iy)
    for (int ix = 0; ix < spec.nx; ++ix)
      field.rates[spec.index(ix, iy)] =
          spec.node_x(ix) < border_x ? rate_wet : rate_dry;
  return field;
}

double bilinear_at(const GridSpec& spec, std::span<const double> values,
                   double x, double y) {
  if (values.size() != spec.size())
    throw ValidationError("raster size does not match grid");
  if (!spec.contains(x, y))
    throw ValidationError("query (" + std::to_string(x) + ", " +
                          std::to_string(y) + ") is outside the field extent");
  const double u = (x - spec.origin_x) / spec.cell_size - 0.5;
  const double v = (y - spec.origin_y) / spec.cell_size - 0.5;
  int i0 = std::clamp(static_cast<int>(std::floor(u)), 0,
                      std::max(spec.nx - 2, 0));
  int j0 = std::clamp(static_cast<int>(std::floor(v)), 0,
                      std::max(spec.ny - 2, 0));
  const int i1 = std::min(i0 + 1, spec.nx - 1);
  const int j1 = std::min(j0 + 1, spec.ny - 1);
  const double fx = std::clamp(u - i0, 0.0, 1.0);
  const double fy = std::clamp(v - j0, 0.0, 1.0);
  const double v00 = values[spec.index(i0, j0)];
  const double v10 = values[spec.index(i1, j0)];
  const double v01 = values[spec.index(i0, j1)];
  const double v11 = values[spec.index(i1, j1)];
  if (v00 == v10 && v00 == v01 && v00 == v11) return v00;
  const double a = v00 + fx * (v10 - v00);
  const double b = v01 + fx * (v11 - v01);
  return a + fy * (b - a);
}

double rate_at(const RateField& field, double x, double y) {
  return bilinear_at(field.spec, field.rates, x, y);
}

std::vector<ObservationRecord> load_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
  if (strip_cr(line) != "x,y,duration_s,counts")
    throw ParseError(path + ":1: expected header \"x,y,duration_s,counts\"");
  std::vector<ObservationRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto tokens = split_csv_line(line);
    if (tokens.size() != 4)
      throw ParseError(where + ": expected 4 fields, got " +
                       std::to_string(tokens.size()));
    ObservationRecord rec;
    rec.x = parse_number(tokens[0], where);
    rec.y = parse_number(tokens[1], where);
    rec.duration = parse_number(tokens[2], where);
    const long long counts = parse_integer(tokens[3], where);
    if (!finite(rec.x) || !finite(rec.y))
      throw ParseError(where + ": coordinates must be finite");
    if (!finite(rec.duration) || rec.duration <= 0.0)
      throw ParseError(where + ": duration_s must be > 0");
    if (counts < 0) throw ParseError(where + ": counts must be >= 0");
    rec.counts = static_cast<double>(counts);
    out.push_back(rec);
  }
  return out;
}

std::vector<ObservationRecord> merge_duplicate_locations(
    std::span<const ObservationRecord> obs) {
  validate_observations(obs);
  std::vector<ObservationRecord> out;
  out.reserve(obs.size());
  for (const ObservationRecord& rec : obs) {
    bool merged = false;
    for (ObservationRecord& kept : out) {
      if (kept.x == rec.x && kept.y == rec.y) {
        kept.counts += rec.counts;
        kept.duration += rec.duration;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(rec);
  }
  return out;
}

std::vector<ObservationRecord> replicate_transect(
    std::span<const ObservationRecord> transect, int lines, double spacing) {
  validate_observations(transect);
  if (lines < 1) throw ValidationError("transect lines must be >= 1");
  if (lines > 1 && (!finite(spacing) || spacing <= 0.0))
    throw ValidationError("transect line spacing must be > 0");
  std::vector<ObservationRecord> out;
  out.reserve(transect.size() * static_cast<std::size_t>(lines));
  for (int k = 0; k < lines; ++k)
    for (const ObservationRecord& rec : transect) {
      ObservationRecord copy = rec;
      copy.y += k * spacing;
      out.push_back(copy);
    }
  return out;
}

RateField build_surrogate_from_observations(
    std::span<const ObservationRecord> obs, const GridSpec& spec,
    const VariogramModel& model) {
  const auto merged = merge_duplicate_locations(obs);
  if (merged.size() < 2)
    throw ValidationError(
        "surrogate construction needs at least 2 distinct locations");
  KrigingMap map =
      krige_grid(merged, model, 0.0, spec, KrigingMethod::ordinary);
  RateField field;
  field.spec = spec;
  field.rates = std::move(map.estimate);
  return field;
}

void save_rate_field(const RateField& field, const std::string& path) {
  field.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError(path + ": cannot open for writing");
  out << grid_spec_to_json(field.spec).dump() << "\n";
  for (int iy = 0; iy < field.spec.ny; ++iy) {
    for (int ix = 0; ix < field.spec.nx; ++ix) {
      if (ix) out << ",";
      out << format_double(field.rates[field.spec.index(ix, iy)]);
    }
    out << "\n";
  }
  if (!out) throw ValidationError(path + ": write failed");
}

RateField load_rate_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
  nlohmann::json header = nlohmann::json::parse(strip_cr(line), nullptr, false);
  if (header.is_discarded())
    throw ParseError(path + ":1: malformed grid header");
  RateField field;
  field.spec = parse_grid_spec(header, path + ":1");
  field.rates.reserve(field.spec.size());
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto tokens = split_csv_line(line);
    if (tokens.size() != static_cast<std::size_t>(field.spec.nx))
      throw ParseError(where + ": expected " + std::to_string(field.spec.nx) +
                       " values, got " + std::to_string(tokens.size()));
    for (const std::string& tok : tokens)
      field.rates.push_back(parse_number(tok, where));
  }
  if (field.rates.size() != field.spec.size())
    throw ParseError(path + ": expected " + std::to_string(field.spec.size()) +
                     " values, got " + std::to_string(field.rates.size()));
  field.validate();
  return field;
}

}  // namespace pkx
