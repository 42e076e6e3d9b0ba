#include "aeromap/raster_io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "aeromap/errors.hpp"

namespace aeromap {

namespace {

// Shortest decimal that parses back to exactly the same double; used for
// georeferencing so join compatibility survives a disk round trip.
std::string exact_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string value_token(double v, const char* fmt) {
  if (is_missing(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

double parse_double_token(const std::string& token, std::size_t line, std::size_t column) {
  if (token == "NA") return kMissing;
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end != begin + token.size() || errno == ERANGE) {
    throw ParseError("non-numeric token '" + token + "'", line, column);
  }
  if (!std::isfinite(v)) {
    throw ParseError("non-finite value '" + token + "'", line, column);
  }
  return v;
}

long parse_int_token(const std::string& token, std::size_t line, std::size_t column) {
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  long v = std::strtol(begin, &end, 10);
  if (end != begin + token.size() || errno == ERANGE) {
    throw ParseError("expected integer, got '" + token + "'", line, column);
  }
  return v;
}

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;
  bool next(std::string& out) {
    if (!std::getline(in, out)) return false;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    ++line_no;
    return true;
  }
};

std::string header_value(LineReader& reader, const std::string& key) {
  std::string line;
  if (!reader.next(line)) {
    throw ParseError("missing header line '" + key + "'", reader.line_no + 1);
  }
  auto space = line.find(' ');
  if (space == std::string::npos || line.substr(0, space) != key) {
    throw ParseError("expected header '" + key + " <value>', got '" + line + "'",
                     reader.line_no);
  }
  return line.substr(space + 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

Raster read_raster(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  LineReader reader{in};

  Raster raster;
  raster.spec.n_rows =
      static_cast<int>(parse_int_token(header_value(reader, "nrows"), reader.line_no, 7));
  raster.spec.n_cols =
      static_cast<int>(parse_int_token(header_value(reader, "ncols"), reader.line_no, 7));
  raster.spec.origin_lat =
      parse_double_token(header_value(reader, "origin_lat"), reader.line_no, 12);
  raster.spec.origin_lon =
      parse_double_token(header_value(reader, "origin_lon"), reader.line_no, 12);
  raster.spec.cell_size =
      parse_double_token(header_value(reader, "cell_size"), reader.line_no, 11);
  raster.spec.timestamp = Date::parse(header_value(reader, "date"));
  raster.variable = header_value(reader, "variable");

  if (!raster.spec.is_valid()) {
    throw ParseError("invalid grid dimensions in '" + path.string() + "'", reader.line_no);
  }

  const std::size_t expected = raster.spec.n_cells();
  raster.values.reserve(expected);
  std::string line;
  while (reader.next(line)) {
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos >= line.size()) break;
      std::size_t start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
      std::string token = line.substr(start, pos - start);
      if (raster.values.size() == expected) {
        throw ParseError("more than " + std::to_string(expected) + " values",
                         reader.line_no, start + 1);
      }
      raster.values.push_back(parse_double_token(token, reader.line_no, start + 1));
    }
  }
  if (raster.values.size() != expected) {
    throw ParseError("expected " + std::to_string(expected) + " values, found " +
                         std::to_string(raster.values.size()),
                     reader.line_no);
  }
  return raster;
}

void write_raster(const Raster& raster, const std::filesystem::path& path) {
  if (raster.values.size() != raster.spec.n_cells()) {
    throw Error("raster value count does not match its grid spec");
  }
  std::ofstream out = open_out(path);
  out << "nrows " << raster.spec.n_rows << '\n';
  out << "ncols " << raster.spec.n_cols << '\n';
  out << "origin_lat " << exact_double(raster.spec.origin_lat) << '\n';
  out << "origin_lon " << exact_double(raster.spec.origin_lon) << '\n';
  out << "cell_size " << exact_double(raster.spec.cell_size) << '\n';
  out << "date " << raster.spec.timestamp.to_string() << '\n';
  out << "variable " << raster.variable << '\n';
  for (int r = 0; r < raster.spec.n_rows; ++r) {
    for (int c = 0; c < raster.spec.n_cols; ++c) {
      if (c) out << ' ';
      out << value_token(raster.at(r, c), "%.6g");
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

namespace {

template <class Enum>
std::vector<Enum> decode_categories(const Raster& raster, int max_code, Enum missing,
                                    const std::filesystem::path& path) {
  std::vector<Enum> out(raster.values.size());
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    double v = raster.values[i];
    if (is_missing(v)) {
      out[i] = missing;
      continue;
    }
    int code = static_cast<int>(v);
    if (static_cast<double>(code) != v || code < 0 || code > max_code) {
      throw ParseError("invalid category code in '" + path.string() + "'");
    }
    out[i] = static_cast<Enum>(code);
  }
  return out;
}

template <class Enum>
Raster encode_categories(const GridSpec& spec, const std::string& variable,
                         const std::vector<Enum>& values, Enum missing) {
  Raster raster(spec, variable);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != missing) raster.values[i] = static_cast<double>(static_cast<int>(values[i]));
  }
  return raster;
}

}  // namespace

QaRaster read_qa(const std::filesystem::path& cloud_path,
                 const std::filesystem::path& adjacency_path,
                 const std::filesystem::path& quality_path) {
  Raster cloud = read_raster(cloud_path);
  Raster adjacency = read_raster(adjacency_path);
  Raster quality = read_raster(quality_path);
  if (!cloud.spec.join_compatible(adjacency.spec) ||
      !cloud.spec.join_compatible(quality.spec)) {
    throw Error("QA planes are not join-compatible");
  }
  QaRaster qa(cloud.spec);
  qa.cloud = decode_categories<CloudMask>(cloud, 2, CloudMask::Missing, cloud_path);
  qa.adjacency =
      decode_categories<AdjacencyMask>(adjacency, 1, AdjacencyMask::Missing, adjacency_path);
  qa.aod_quality = decode_categories<AodQuality>(quality, 2, AodQuality::Missing, quality_path);
  return qa;
}

void write_qa(const QaRaster& qa, const std::filesystem::path& cloud_path,
              const std::filesystem::path& adjacency_path,
              const std::filesystem::path& quality_path) {
  write_raster(encode_categories(qa.spec, "qa_cloud", qa.cloud, CloudMask::Missing),
               cloud_path);
  write_raster(
      encode_categories(qa.spec, "qa_adjacency", qa.adjacency, AdjacencyMask::Missing),
      adjacency_path);
  write_raster(encode_categories(qa.spec, "qa_quality", qa.aod_quality, AodQuality::Missing),
               quality_path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

constexpr const char* kStationHeader = "station_id,lat,lon,date,pm25";

}  // namespace

std::vector<StationRecord> read_stations(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  LineReader reader{in};

  std::string line;
  if (!reader.next(line) || line != kStationHeader) {
    throw ParseError("expected header '" + std::string(kStationHeader) + "'", 1);
  }

  std::vector<StationRecord> records;
  std::set<std::pair<std::string, Date>> seen;
  while (reader.next(line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 5) {
      throw ParseError("expected 5 fields, got " + std::to_string(fields.size()),
                       reader.line_no);
    }
    StationRecord rec;
    rec.station_id = fields[0];
    if (rec.station_id.empty()) throw ParseError("empty station_id", reader.line_no, 1);
    rec.lat = parse_double_token(fields[1], reader.line_no, 2);
    rec.lon = parse_double_token(fields[2], reader.line_no, 3);
    rec.date = Date::parse(fields[3]);
    if (!fields[4].empty()) {
      rec.pm25 = parse_double_token(fields[4], reader.line_no, 5);
      if (rec.pm25 < 0) {
        throw ParseError("negative pm25 for station " + rec.station_id, reader.line_no, 5);
      }
    }
    if (!seen.emplace(rec.station_id, rec.date).second) {
      throw ParseError("duplicate (station_id, date): " + rec.station_id + ", " +
                           rec.date.to_string(),
                       reader.line_no);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_stations(const std::vector<StationRecord>& records,
                    const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kStationHeader << '\n';
  for (const auto& rec : records) {
    out << rec.station_id << ',' << value_token(rec.lat, "%.6g") << ','
        << value_token(rec.lon, "%.6g") << ',' << rec.date.to_string() << ',';
    if (rec.has_pm25()) out << value_token(rec.pm25, "%.6g");
    out << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<Sample> read_samples(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  LineReader reader{in};

  std::string expected_header = "station_id,date";
  for (auto name : kFeatureNames) expected_header += "," + std::string(name);
  expected_header += ",PM_c";

  std::string line;
  if (!reader.next(line) || line != expected_header) {
    throw ParseError("unexpected samples header", 1);
  }

  std::vector<Sample> samples;
  while (reader.next(line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != kNumFeatures + 3) {
      throw ParseError("expected " + std::to_string(kNumFeatures + 3) + " fields",
                       reader.line_no);
    }
    Sample s;
    s.station_id = fields[0];
    s.date = Date::parse(fields[1]);
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      s.features[i] = parse_double_token(fields[2 + i], reader.line_no, 3 + i);
    }
    s.target = parse_double_token(fields.back(), reader.line_no, fields.size());
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_samples(const std::vector<Sample>& samples, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "station_id,date";
  for (auto name : kFeatureNames) out << ',' << name;
  out << ",PM_c\n";
  for (const auto& s : samples) {
    out << s.station_id << ',' << s.date.to_string();
    for (double f : s.features) out << ',' << value_token(f, "%.12g");
    out << ',' << value_token(s.target, "%.12g") << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace aeromap
