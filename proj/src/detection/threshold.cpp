#include "mguard/detection/threshold.hpp"

#include "mguard/binary_io.hpp"
#include "mguard/error.hpp"
#include "mguard/log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

namespace mguard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double f1_of(std::size_t tp, std::size_t fp, std::size_t fn) {
  const auto denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

Threshold calibrate_threshold(std::span<const double> scores, std::span<const bool> anomalous) {
  expect_dim("calibration labels", static_cast<long>(scores.size()), static_cast<long>(anomalous.size()));
  Threshold result;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw NumericError("calibration score is NaN");
    (anomalous[i] ? result.positives : result.negatives) += 1;
  }
  if (result.positives == 0 || result.negatives == 0)
    throw DataError("threshold calibration needs both normal and anomalous validation windows (got " +
                    std::to_string(result.positives) + " anomalous, " + std::to_string(result.negatives) +
                    " normal); provide labeled anomalous validation windows");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<double> distinct;
  for (auto i : order)
    if (distinct.empty() || distinct.back() != scores[i]) distinct.push_back(scores[i]);
  result.candidate_count = distinct.size() + 1;  // midpoints plus both sentinels

  if (distinct.size() == 1) {
    warn("all validation scores are identical; threshold set to +inf (everything normal)");
    result.tau = kInf;
    result.f1 = 0.0;
    result.degenerate = true;
    return result;
  }

  // Sweep from +inf downward: lowering tau past each distinct score admits
  // that whole tie group. Strict improvement keeps the largest tau on ties.
  std::size_t tp = 0, fp = 0;
  result.tau = kInf;
  result.f1 = f1_of(0, 0, result.positives);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < distinct.size(); ++g) {
    while (pos < order.size() && scores[order[pos]] == distinct[g]) {
      (anomalous[order[pos]] ? tp : fp) += 1;
      ++pos;
    }
    double tau;
    if (g + 1 < distinct.size()) {
      const double hi = distinct[g], lo = distinct[g + 1];
      tau = lo + (hi - lo) / 2;
      if (!(tau > lo)) tau = hi;  // adjacent doubles
    } else {
      tau = -kInf;
    }
    const double f1 = f1_of(tp, fp, result.positives - tp);
    if (f1 > result.f1) {
      result.f1 = f1;
      result.tau = tau;
    }
  }
  return result;
}

Threshold calibrate_threshold(std::span<const ScoredWindow> validation) {
  std::vector<double> scores;
  std::vector<char> labels;  // not vector<bool>: it has no contiguous storage
  for (const auto& s : validation) {
    if (s.label == WindowLabel::unlabeled) continue;
    scores.push_back(s.score);
    labels.push_back(s.label == WindowLabel::anomalous);
  }
  const auto flags = std::make_unique<bool[]>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) flags[i] = labels[i] != 0;
  return calibrate_threshold(scores, std::span<const bool>(flags.get(), labels.size()));
}

void classify(std::span<ScoredWindow> scored, double tau) {
  for (auto& s : scored) s.anomalous = is_anomalous(s.score, tau);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

namespace {

double parse_double(const std::string& text, const std::string& what) {
  if (text == "inf" || text == "+inf") return kInf;
  if (text == "-inf") return -kInf;
  double value = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) throw DataError(what + ": not a number: '" + text + "'");
  return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw DataError(what + ": not an unsigned integer: '" + text + "'");
  return value;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string format_threshold(const Threshold& t) {
  std::ostringstream out;
  out << "tau=" << format_double(t.tau) << "\n"
      << "validation_f1=" << format_double(t.f1) << "\n"
      << "candidates=" << t.candidate_count << "\n"
      << "positives=" << t.positives << "\n"
      << "negatives=" << t.negatives << "\n"
      << "degenerate=" << (t.degenerate ? 1 : 0) << "\n";
  return out.str();
}

Threshold parse_threshold(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("threshold file: expected key=value, got '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!kv.contains("tau")) throw DataError("threshold file has no tau");
  Threshold t;
  t.tau = parse_double(kv["tau"], "tau");
  if (kv.contains("validation_f1")) t.f1 = parse_double(kv["validation_f1"], "validation_f1");
  if (kv.contains("candidates")) t.candidate_count = parse_u64(kv["candidates"], "candidates");
  if (kv.contains("positives")) t.positives = parse_u64(kv["positives"], "positives");
  if (kv.contains("negatives")) t.negatives = parse_u64(kv["negatives"], "negatives");
  t.degenerate = kv["degenerate"] == "1";
  return t;
}

void write_threshold(const std::filesystem::path& path, const Threshold& threshold) {
  write_text_file(path, format_threshold(threshold));
}

Threshold read_threshold(const std::filesystem::path& path) { return parse_threshold(read_text_file(path)); }

std::string scores_csv(std::span<const ScoredWindow> scored) {
  std::string out = "building_id,start_index,R,F,S,label,verdict\n";
  for (const auto& s : scored) {
    out += s.building_id;
    out += ',' + std::to_string(s.start_index);
    out += ',' + format_double(s.residual);
    out += ',' + format_double(s.feature);
    out += ',' + format_double(s.score);
    out += ',';
    if (s.label != WindowLabel::unlabeled) out += s.label == WindowLabel::anomalous ? '1' : '0';
    out += ',';
    if (s.anomalous) out += *s.anomalous ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::vector<ScoredWindow> parse_scores_csv(const std::string& text) {
  std::vector<ScoredWindow> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line.rfind("building_id,start_index,R,F,S", 0) != 0) throw DataError("scores CSV: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_commas(line);
    const std::string where = "scores CSV line " + std::to_string(line_no);
    if (f.size() != 7) throw DataError(where + ": expected 7 fields");
    ScoredWindow s;
    s.building_id = f[0];
    s.start_index = parse_u64(f[1], where);
    s.residual = parse_double(f[2], where);
    s.feature = parse_double(f[3], where);
    s.score = parse_double(f[4], where);
    if (f[5] == "1") s.label = WindowLabel::anomalous;
    else if (f[5] == "0") s.label = WindowLabel::normal;
    else if (!f[5].empty()) throw DataError(where + ": label must be 0, 1 or empty");
    if (f[6] == "1" || f[6] == "0") s.anomalous = f[6] == "1";
    else if (!f[6].empty()) throw DataError(where + ": verdict must be 0, 1 or empty");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mguard
