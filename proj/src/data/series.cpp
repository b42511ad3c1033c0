#include "mguard/data/series.hpp"

#include "mguard/binary_io.hpp"
#include "mguard/error.hpp"
#include "mguard/log.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace mguard {

std::size_t BuildingSeries::missing_count() const {
  return static_cast<std::size_t>(std::count_if(readings.begin(), readings.end(), [](double v) { return std::isnan(v); }));
}

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i < line.size() && line[i] == '"') quoted = !quoted;
    if (i == line.size() || (line[i] == ',' && !quoted)) {
      std::string_view field = trim(line.substr(start, i - start));
      if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
      fields.push_back(field);
      start = i + 1;
    }
  }
  return fields;
}

bool is_missing_token(std::string_view s) {
  if (s.empty()) return true;
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower == "nan" || lower == "na" || lower == "null" || lower == "none";
}

}  // namespace

std::optional<std::int64_t> parse_hour_timestamp(std::string_view text) {
  text = trim(text);
  if (text.size() < 13 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ')) return std::nullopt;
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month) ||
      !parse_int(text.substr(8, 2), day) || !parse_int(text.substr(11, 2), hour)) {
    return std::nullopt;
  }
  std::size_t pos = 13;
  if (pos < text.size() && text[pos] == ':') {
    if (text.size() < pos + 3 || !parse_int(text.substr(pos + 1, 2), minute)) return std::nullopt;
    pos += 3;
    if (pos < text.size() && text[pos] == ':') {
      if (text.size() < pos + 3 || !parse_int(text.substr(pos + 1, 2), second)) return std::nullopt;
      pos += 3;
      // Fractional seconds are accepted only when zero.
      if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && text[pos] == '0') ++pos;
      }
    }
  }
  int offset_minutes = 0;
  std::string_view zone = text.substr(pos);
  if (zone == "Z" || zone.empty()) {
  } else if ((zone.front() == '+' || zone.front() == '-') && zone.size() == 6 && zone[3] == ':') {
    int oh = 0, om = 0;
    if (!parse_int(zone.substr(1, 2), oh) || !parse_int(zone.substr(4, 2), om)) return std::nullopt;
    offset_minutes = (zone.front() == '+' ? 1 : -1) * (oh * 60 + om);
  } else {
    return std::nullopt;
  }
  if (hour > 23 || minute != 0 || second != 0 || offset_minutes % 60 != 0) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = sys_days(ymd).time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 24 + hour - offset_minutes / 60;
}

std::string format_hour_timestamp(std::int64_t hour) {
  using namespace std::chrono;
  const auto days = static_cast<int>(hour >= 0 ? hour / 24 : (hour - 23) / 24);
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hour - static_cast<std::int64_t>(days) * 24));
  return buf;
}

std::vector<BuildingSeries> parse_meter_csv(std::string_view text, const CsvSchema& schema) {
  struct Row {
    double reading;
    std::uint8_t label;
    std::size_t line;
  };
  std::size_t line_number = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_number;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  std::string_view header;
  if (!next_line(header)) throw DataError("meter csv: empty input");
  const auto columns = split_csv_line(header);
  auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto b_col = find_col(schema.building_col);
  const auto t_col = find_col(schema.timestamp_col);
  const auto r_col = find_col(schema.reading_col);
  const auto l_col = schema.label_col.empty() ? std::nullopt : find_col(schema.label_col);
  if (!b_col || !t_col || !r_col) {
    throw DataError("meter csv: header must contain '" + schema.building_col + "', '" + schema.timestamp_col +
                    "' and '" + schema.reading_col + "'");
  }

  std::map<std::string, std::map<std::int64_t, Row>> by_building;
  std::string_view line;
  while (next_line(line)) {
    const auto fields = split_csv_line(line);
    auto fail = [&](const std::string& why) {
      throw DataError("meter csv line " + std::to_string(line_number) + ": " + why);
    };
    if (fields.size() != columns.size()) {
      fail("expected " + std::to_string(columns.size()) + " fields, found " + std::to_string(fields.size()));
    }
    const std::string building(fields[*b_col]);
    if (building.empty()) fail("empty building id");
    const auto hour = parse_hour_timestamp(fields[*t_col]);
    if (!hour) fail("unparseable hourly timestamp '" + std::string(fields[*t_col]) + "'");

    double reading = std::numeric_limits<double>::quiet_NaN();
    const std::string_view raw = fields[*r_col];
    if (!is_missing_token(raw)) {
      const std::string buffer(raw);
      char* end = nullptr;
      reading = std::strtod(buffer.c_str(), &end);
      if (end != buffer.c_str() + buffer.size() || !std::isfinite(reading)) fail("bad reading '" + buffer + "'");
    }
    std::uint8_t label = 0;
    if (l_col) {
      const std::string_view l = fields[*l_col];
      if (l == "0" || l == "0.0") {
        label = 0;
      } else if (l == "1" || l == "1.0") {
        label = 1;
      } else {
        fail("label must be 0 or 1, got '" + std::string(l) + "'");
      }
    }
    auto [it, inserted] = by_building[building].emplace(*hour, Row{reading, label, line_number});
    if (!inserted) {
      fail("duplicate timestamp " + format_hour_timestamp(*hour) + " for building '" + building +
           "' (first seen on line " + std::to_string(it->second.line) + ")");
    }
  }

  std::vector<BuildingSeries> out;
  out.reserve(by_building.size());
  for (auto& [id, rows] : by_building) {
    BuildingSeries s;
    s.building_id = id;
    s.start_hour = rows.begin()->first;
    const auto length = static_cast<std::size_t>(rows.rbegin()->first - s.start_hour + 1);
    s.readings.assign(length, std::numeric_limits<double>::quiet_NaN());
    if (l_col) s.labels.emplace(length, std::uint8_t{0});
    for (const auto& [hour, row] : rows) {
      const auto k = static_cast<std::size_t>(hour - s.start_hour);
      s.readings[k] = row.reading;
      if (l_col) (*s.labels)[k] = row.label;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<BuildingSeries> ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  return parse_meter_csv(read_text_file(path), schema);
}

BuildingSeries impute(BuildingSeries series) {
  auto& r = series.readings;
  const auto first = std::find_if(r.begin(), r.end(), [](double v) { return !std::isnan(v); });
  if (first == r.end()) {
    warn("building '" + series.building_id + "' has no observed readings; it normalizes to zeros");
    std::fill(r.begin(), r.end(), 0.0);
    series.all_missing = true;
    return series;
  }
  double last = *first;
  for (auto it = first; it != r.end(); ++it) {
    if (std::isnan(*it)) {
      *it = last;
    } else {
      last = *it;
    }
  }
  std::fill(r.begin(), first, *first);
  return series;
}

BuildingSeries normalize(BuildingSeries series) {
  auto& r = series.readings;
  if (r.empty()) return series;
  double sum = 0.0;
  for (double v : r) sum += v;
  const double mu = sum / static_cast<double>(r.size());
  double sq = 0.0;
  for (double v : r) sq += (v - mu) * (v - mu);
  double sigma = std::sqrt(sq / static_cast<double>(r.size()));
  if (!(sigma >= kDegenerateSigma)) sigma = 1.0;
  for (double& v : r) {
    v = (v - mu) / sigma;
    // Residual gaps (none after impute) become zero rather than NaN.
    if (std::isnan(v)) v = 0.0;
  }
  series.mu = mu;
  series.sigma = sigma;
  return series;
}

std::vector<double> unnormalize(std::span<const double> values, double mu, double sigma) {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return v * sigma + mu; });
  return out;
}

double squash(double value, double clip_c) { return std::clamp(value, -clip_c, clip_c) / clip_c; }

double unsquash(double value, double clip_c) { return value * clip_c; }

BuildingSeries squash(BuildingSeries series, double clip_c) {
  if (!(clip_c > 0.0)) throw ConfigError("clip constant must be positive");
  for (double& v : series.readings) v = squash(v, clip_c);
  return series;
}

BuildingSeries prepare_series(BuildingSeries series, double clip_c) {
  return squash(normalize(impute(std::move(series))), clip_c);
}

}  // namespace mguard
