#include "drivestyle/evaluation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "drivestyle/errors.hpp"

namespace drivestyle {
namespace {

constexpr const char* kModule = "evaluation";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos
                                               ? std::string_view::npos
                                               : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

FrameIndex parse_frame(std::string_view field, std::size_t line) {
  FrameIndex v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(kModule, line, "not a frame index: '" + std::string(field) + "'");
  }
  return v;
}

ManeuverStyle parse_style(std::string_view field, std::size_t line) {
  const auto s = maneuver_style_from_string(field);
  if (!s) throw ParseError(kModule, line, "unknown style '" + std::string(field) + "'");
  return *s;
}

// Reads data lines after a header that must equal `header`.
template <typename OnRow>
void read_csv(std::istream& in, std::string_view header, std::size_t width, OnRow on_row) {
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line != header) {
        throw ValidationError(kModule, "expected header '" + std::string(header) + "', got '" +
                                           std::string(line) + "'");
      }
      have_header = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != width) {
      throw ParseError(kModule, line_no,
                       "expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()));
    }
    on_row(fields, line_no);
  }
}

}  // namespace

std::string_view to_string(ManeuverStyle style) {
  switch (style) {
    case ManeuverStyle::kOverspeeding: return "overspeeding";
    case ManeuverStyle::kOvertaking: return "overtaking";
    case ManeuverStyle::kSuddenLaneChange: return "sudden_lane_change";
    case ManeuverStyle::kWeaving: return "weaving";
  }
  return "overspeeding";
}

std::string_view table_code(ManeuverStyle style) {
  switch (style) {
    case ManeuverStyle::kOverspeeding: return "OS";
    case ManeuverStyle::kOvertaking: return "OT";
    case ManeuverStyle::kSuddenLaneChange: return "SLC";
    case ManeuverStyle::kWeaving: return "W";
  }
  return "OS";
}

std::optional<ManeuverStyle> maneuver_style_from_string(std::string_view name) {
  for (const auto s : kAllManeuverStyles) {
    if (name == to_string(s) || name == table_code(s)) return s;
  }
  return std::nullopt;
}

AnnotationSet parse_annotations(std::istream& in, double frame_rate_hz) {
  if (!(frame_rate_hz > 0.0)) throw ValidationError(kModule, "frame_rate_hz must be positive");
  AnnotationSet set;
  set.frame_rate_hz = frame_rate_hz;
  read_csv(in, "video_id,agent_id,style,annotator_id,start_frame,end_frame", 6,
           [&](const std::vector<std::string_view>& f, std::size_t line) {
             const FrameInterval iv{parse_frame(f[4], line), parse_frame(f[5], line)};
             if (iv.start > iv.end) throw ParseError(kModule, line, "start_frame > end_frame");
             AnnotationKey key{std::string(f[0]), std::string(f[1]), parse_style(f[2], line)};
             set.entries[key].push_back(iv);
           });
  return set;
}

std::vector<GroundTruthLabel> parse_ground_truth(std::istream& in) {
  std::vector<GroundTruthLabel> labels;
  read_csv(in, "agent_id,style,start_frame,end_frame", 4,
           [&](const std::vector<std::string_view>& f, std::size_t line) {
             GroundTruthLabel l{std::string(f[0]), parse_style(f[1], line),
                                parse_frame(f[2], line), parse_frame(f[3], line)};
             if (l.start_frame > l.end_frame) {
               throw ParseError(kModule, line, "start_frame > end_frame");
             }
             labels.push_back(std::move(l));
           });
  return labels;
}

void write_ground_truth(std::ostream& out, std::span<const GroundTruthLabel> labels) {
  out << "agent_id,style,start_frame,end_frame\n";
  for (const auto& l : labels) {
    out << l.agent_id << ',' << to_string(l.style) << ',' << l.start_frame << ',' << l.end_frame
        << '\n';
  }
}

void add_ground_truth(AnnotationSet& set, const std::string& video_id,
                      std::span<const GroundTruthLabel> labels) {
  for (const auto& l : labels) {
    set.entries[{video_id, l.agent_id, l.style}].push_back({l.start_frame, l.end_frame});
  }
}

TemporalDistribution expected_frame(std::span<const FrameInterval> annotations) {
  if (annotations.empty()) throw ValidationError(kModule, "annotation set is empty");
  TemporalDistribution d;
  d.support_start = annotations.front().start;
  d.support_end = annotations.front().end;
  for (const auto& a : annotations) {
    if (a.start > a.end) throw ValidationError(kModule, "annotation with start > end");
    d.support_start = std::min(d.support_start, a.start);
    d.support_end = std::max(d.support_end, a.end);
  }
  const auto span = static_cast<std::size_t>(d.support_end - d.support_start + 1);
  d.counts.assign(span, 0);
  for (const auto& a : annotations) {
    for (FrameIndex t = a.start; t <= a.end; ++t) {
      ++d.counts[static_cast<std::size_t>(t - d.support_start)];
    }
  }
  const double total =
      static_cast<double>(std::accumulate(d.counts.begin(), d.counts.end(), std::size_t{0}));
  d.probability.resize(span);
  for (std::size_t k = 0; k < span; ++k) {
    d.probability[k] = static_cast<double>(d.counts[k]) / total;
  }
  // Sum offsets from the support start so large frame numbers stay exact.
  double offset = 0.0;
  for (std::size_t k = 0; k < span; ++k) {
    offset += static_cast<double>(k) * static_cast<double>(d.counts[k]);
  }
  d.expectation = static_cast<double>(d.support_start) + offset / total;
  return d;
}

double tde(double t_sle_frame, double expected, double frame_rate_hz) {
  if (!(frame_rate_hz > 0.0)) throw ContractViolation(kModule, "frame_rate_hz must be positive");
  return std::abs((t_sle_frame - expected) / frame_rate_hz);
}

const TdeRow* TdeTable::row(ManeuverStyle style) const {
  for (const auto& r : rows) {
    if (r.style == style) return &r;
  }
  return nullptr;
}

TdeTable evaluate_run(std::span<const Prediction> predictions, const AnnotationSet& labels) {
  std::map<AnnotationKey, double> predicted;
  for (const auto& p : predictions) {
    if (p.frame) predicted[p.key] = *p.frame;
  }
  std::map<ManeuverStyle, TdeRow> rows;
  TdeTable table;
  for (const auto& [key, intervals] : labels.entries) {
    auto& row = rows[key.style];
    row.style = key.style;
    const auto it = predicted.find(key);
    if (it == predicted.end()) {
      ++row.missing;
      ++table.missing_total;
      continue;
    }
    const auto dist = expected_frame(intervals);
    row.values.push_back(tde(it->second, dist.expectation, labels.frame_rate_hz));
    ++row.matched;
  }
  for (const auto style : kAllManeuverStyles) {
    const auto it = rows.find(style);
    if (it == rows.end()) continue;
    auto row = it->second;
    if (!row.values.empty()) {
      row.mean_tde = std::accumulate(row.values.begin(), row.values.end(), 0.0) /
                     static_cast<double>(row.values.size());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_tde_csv(std::ostream& out, const TdeTable& table) {
  out << "style,mean_tde_s,matched,missing\n";
  for (const auto& r : table.rows) {
    out << table_code(r.style) << ',' << (r.mean_tde ? format_number(*r.mean_tde) : "") << ','
        << r.matched << ',' << r.missing << '\n';
  }
}

}  // namespace drivestyle
