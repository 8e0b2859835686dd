#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "uaweight/pipeline.hpp"
#include "uaweight/text_io.hpp"

namespace uaweight {

using nlohmann::json;

std::vector<std::string> score_columns() {
  std::vector<std::string> columns{"id"};
  for (const auto f : kAllQualityFactors) columns.emplace_back(to_string(f));
  for (const char* c : {"w_image", "w_it", "w_ai", "raw_mean", "weight"}) columns.emplace_back(c);
  return columns;
}

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::vector<std::string_view> lines_of(std::string_view contents) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

double parse_number(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') fail(ErrorCode::MalformedSidecar, where + ": bad number '" + text + "'");
  return value;
}

std::vector<double> tail_values(const ScoreRecord& r) { return {r.w_image, r.w_it, r.w_ai, r.raw_mean, r.weight}; }

void assign_tail(ScoreRecord& r, const std::vector<double>& v) {
  r.w_image = v[0];
  r.w_it = v[1];
  r.w_ai = v[2];
  r.raw_mean = v[3];
  r.weight = v[4];
}

}  // namespace

std::string format_score_jsonl(const std::vector<ScoreRecord>& records) {
  const auto columns = score_columns();
  std::string out;
  for (const auto& r : records) {
    out += "{\"id\":" + json_quote(r.id);
    for (const auto f : kAllQualityFactors) {
      out += ",\"" + std::string(to_string(f)) + "\":";
      const auto it = r.image_scores.find(f);
      out += it == r.image_scores.end() ? "null" : format_g9(it->second);
    }
    const auto tail = tail_values(r);
    for (std::size_t i = 0; i < tail.size(); ++i) {
      out += ",\"" + columns[1 + kAllQualityFactors.size() + i] + "\":" + format_g9(tail[i]);
    }
    out += "}\n";
  }
  return out;
}

std::string format_score_csv(const std::vector<ScoreRecord>& records) {
  const auto columns = score_columns();
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out.push_back('\n');
  for (const auto& r : records) {
    out += csv_field(r.id);
    for (const auto f : kAllQualityFactors) {
      out.push_back(',');
      const auto it = r.image_scores.find(f);
      if (it != r.image_scores.end()) out += format_g9(it->second);
    }
    for (const double v : tail_values(r)) out += "," + format_g9(v);
    out.push_back('\n');
  }
  return out;
}

std::string format_weights_csv(const std::vector<ScoreRecord>& records) {
  std::string out = "id,weight\n";
  for (const auto& r : records) out += csv_field(r.id) + "," + format_g9(r.weight) + "\n";
  return out;
}

std::vector<ScoreRecord> parse_score_jsonl(std::string_view contents) {
  const auto columns = score_columns();
  std::vector<ScoreRecord> records;
  std::size_t line_no = 0;
  for (const auto line : lines_of(contents)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::string where = "report line " + std::to_string(line_no);
    try {
      const auto doc = json::parse(line);
      ScoreRecord r;
      r.id = doc.at("id").get<std::string>();
      for (const auto f : kAllQualityFactors) {
        const auto& v = doc.at(std::string(to_string(f)));
        if (!v.is_null()) r.image_scores.emplace(f, v.get<double>());
      }
      std::vector<double> tail;
      for (std::size_t i = 1 + kAllQualityFactors.size(); i < columns.size(); ++i) {
        tail.push_back(doc.at(columns[i]).get<double>());
      }
      assign_tail(r, tail);
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail(ErrorCode::MalformedSidecar, where + ": " + e.what());
    }
  }
  return records;
}

std::vector<ScoreRecord> parse_score_csv(std::string_view contents) {
  const auto columns = score_columns();
  const auto lines = lines_of(contents);
  if (lines.empty() || parse_csv_line(lines.front()) != columns) {
    fail(ErrorCode::MissingColumn, "score CSV header does not match the expected columns");
  }
  std::vector<ScoreRecord> records;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const std::string where = "score CSV line " + std::to_string(n + 1);
    const auto fields = parse_csv_line(lines[n]);
    if (fields.size() != columns.size()) fail(ErrorCode::MissingColumn, where + ": wrong field count");
    ScoreRecord r;
    r.id = fields[0];
    for (std::size_t i = 0; i < kAllQualityFactors.size(); ++i) {
      if (!fields[1 + i].empty()) r.image_scores.emplace(kAllQualityFactors[i], parse_number(fields[1 + i], where));
    }
    std::vector<double> tail;
    for (std::size_t i = 1 + kAllQualityFactors.size(); i < columns.size(); ++i) {
      tail.push_back(parse_number(fields[i], where));
    }
    assign_tail(r, tail);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<std::pair<std::string, double>> parse_weights_csv(std::string_view contents) {
  const auto lines = lines_of(contents);
  if (lines.empty() || parse_csv_line(lines.front()) != std::vector<std::string>{"id", "weight"}) {
    fail(ErrorCode::MissingColumn, "weights CSV must start with the header 'id,weight'");
  }
  std::vector<std::pair<std::string, double>> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const std::string where = "weights CSV line " + std::to_string(n + 1);
    const auto fields = parse_csv_line(lines[n]);
    if (fields.size() != 2) fail(ErrorCode::MissingColumn, where + ": expected 2 fields");
    rows.emplace_back(fields[0], parse_number(fields[1], where));
  }
  return rows;
}

WeightStats weight_stats(std::span<const double> weights, std::size_t bins) {
  if (bins == 0) fail(ErrorCode::InvalidConfig, "histogram needs at least one bin");
  WeightStats stats;
  stats.bins.assign(bins, 0);
  stats.count = weights.size();
  if (weights.empty()) return stats;

  std::vector<double> sorted(weights.begin(), weights.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (const double w : sorted) sum += w;
  stats.mean = sum / static_cast<double>(sorted.size());
  const std::size_t mid = sorted.size() / 2;
  stats.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  stats.min = sorted.front();
  stats.max = sorted.back();
  stats.lo = std::min(0.0, stats.min);
  stats.hi = std::max(1.0, stats.max);

  const double width = (stats.hi - stats.lo) / static_cast<double>(bins);
  for (const double w : sorted) {
    auto index = static_cast<std::size_t>(std::floor((w - stats.lo) / width));
    stats.bins[std::min(index, bins - 1)]++;
  }
  return stats;
}

std::string format_weight_stats(const WeightStats& stats) {
  if (stats.count == 0) return "no samples\n";
  std::string out = "samples: " + std::to_string(stats.count) + "\n";
  out += "mean: " + format_g9(stats.mean) + "\nmedian: " + format_g9(stats.median) +
         "\nmin: " + format_g9(stats.min) + "\nmax: " + format_g9(stats.max) + "\n";
  out += "histogram (" + std::to_string(stats.bins.size()) + " bins over [" + format_g9(stats.lo) + ", " +
         format_g9(stats.hi) + "]):\n";
  const std::size_t peak = *std::max_element(stats.bins.begin(), stats.bins.end());
  const double width = (stats.hi - stats.lo) / static_cast<double>(stats.bins.size());
  for (std::size_t b = 0; b < stats.bins.size(); ++b) {
    char range[64];
    const bool last = b + 1 == stats.bins.size();
    std::snprintf(range, sizeof range, "[%.3f, %.3f%c", stats.lo + width * static_cast<double>(b),
                  stats.lo + width * static_cast<double>(b + 1), last ? ']' : ')');
    const std::size_t bar = peak == 0 ? 0 : (stats.bins[b] * 40 + peak - 1) / peak;
    char count[32];
    std::snprintf(count, sizeof count, " %8zu ", stats.bins[b]);
    out += std::string("  ") + range + count + std::string(bar, '#') + "\n";
  }
  return out;
}

}  // namespace uaweight
