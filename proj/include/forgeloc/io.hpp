// Line-delimited JSON files: one object per line, UTF-8, '\n' separated.
//
//   ground truth  {"video_id":"v1","num_frames":300,"label":"fake","segments":[[30,90]]}
//   frame scores  {"video_id":"v1","frame":16,"score":0.93,"num_frames":300}
//   proposals     {"video_id":"v1","start":30,"end":90,"confidence":0.87}
//
// Segments are half-open frame ranges. "num_frames" is optional in score
// files. Real numbers are written with at most 12 significant digits.
// Parsers reject the whole file on the first bad line.

#ifndef FORGELOC_IO_HPP_
#define FORGELOC_IO_HPP_

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "forgeloc/core.hpp"
#include "forgeloc/metrics.hpp"

namespace forgeloc {

class FileFormatError : public std::runtime_error {
 public:
  FileFormatError(std::size_t line, std::string field, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + message),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Rounds to 12 significant digits, the precision every writer uses.
inline double round_significant(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return std::strtod(buf, nullptr);
}

namespace detail {

using Json = nlohmann::ordered_json;

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-blank line parsed as a JSON object; std::nullopt at end.
  std::optional<Json> next() {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      Json obj;
      try {
        obj = Json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw FileFormatError(line_, "<line>", std::string("malformed JSON: ") + e.what());
      }
      if (!obj.is_object()) throw FileFormatError(line_, "<line>", "expected a JSON object");
      return obj;
    }
    return std::nullopt;
  }

  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw FileFormatError(line_, field, message);
  }

  void only_fields(const Json& obj, std::initializer_list<const char*> allowed) const {
    for (const auto& item : obj.items()) {
      bool known = false;
      for (const char* name : allowed) known = known || item.key() == name;
      if (!known) fail(item.key(), "unknown field");
    }
  }

  const Json& field(const Json& obj, const char* name) const {
    auto it = obj.find(name);
    if (it == obj.end()) fail(name, "missing");
    return *it;
  }

  std::string string_field(const Json& obj, const char* name) const {
    const Json& v = field(obj, name);
    if (!v.is_string() || v.get<std::string>().empty()) fail(name, "expected a non-empty string");
    return v.get<std::string>();
  }

  FrameIndex int_field(const Json& obj, const char* name) const { return as_int(field(obj, name), name); }

  FrameIndex as_int(const Json& v, const char* name) const {
    if (!v.is_number_integer()) fail(name, "expected an integer");
    return v.get<FrameIndex>();
  }

  double real_field(const Json& obj, const char* name) const {
    const Json& v = field(obj, name);
    if (!v.is_number()) fail(name, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(name, "expected a finite number");
    return x;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError(0, "<path>", "cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ground truth

inline std::vector<GroundTruthRecord> parse_ground_truth(std::istream& in) {
  detail::LineReader reader(in);
  std::vector<GroundTruthRecord> records;
  std::set<std::string> seen;
  while (auto obj = reader.next()) {
    reader.only_fields(*obj, {"video_id", "num_frames", "label", "segments"});
    GroundTruthRecord gt;
    gt.video_id = reader.string_field(*obj, "video_id");
    gt.num_frames = reader.int_field(*obj, "num_frames");
    const std::string label = reader.string_field(*obj, "label");
    if (label == "fake") {
      gt.label = BinaryLabel::Fake;
    } else if (label == "real") {
      gt.label = BinaryLabel::Real;
    } else {
      reader.fail("label", "expected \"real\" or \"fake\"");
    }
    const auto& segments = reader.field(*obj, "segments");
    if (!segments.is_array()) reader.fail("segments", "expected an array of [start, end] pairs");
    for (const auto& pair : segments) {
      if (!pair.is_array() || pair.size() != 2) reader.fail("segments", "expected [start, end]");
      gt.segments.push_back({reader.as_int(pair[0], "segments"), reader.as_int(pair[1], "segments")});
    }
    const char* field = "segments";
    try {
      validate(gt);
    } catch (const std::invalid_argument& e) {
      if (gt.num_frames <= 0) field = "num_frames";
      reader.fail(field, e.what());
    }
    if (!seen.insert(gt.video_id).second) reader.fail("video_id", "duplicate video '" + gt.video_id + "'");
    records.push_back(std::move(gt));
  }
  return records;
}

inline std::vector<GroundTruthRecord> parse_ground_truth(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_ground_truth(in);
}

inline void write_ground_truth(std::ostream& out, const std::vector<GroundTruthRecord>& records) {
  for (const auto& gt : records) {
    validate(gt);
    detail::Json segments = detail::Json::array();
    for (const auto& s : gt.segments) segments.push_back({s.start, s.end});
    detail::Json obj;
    obj["video_id"] = gt.video_id;
    obj["num_frames"] = gt.num_frames;
    obj["label"] = is_fake(gt.label) ? "fake" : "real";
    obj["segments"] = std::move(segments);
    out << obj.dump() << '\n';
  }
}

inline void write_ground_truth(const std::string& path, const std::vector<GroundTruthRecord>& records) {
  auto out = detail::open_output(path);
  write_ground_truth(out, records);
  detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Frame scores

using ScoreMap = std::map<std::string, FrameScoreSeries>;

inline ScoreMap parse_frame_scores(std::istream& in) {
  struct Pending {
    std::map<FrameIndex, double> entries;
    std::optional<FrameIndex> num_frames;
    std::size_t num_frames_line = 0;
  };
  detail::LineReader reader(in);
  std::map<std::string, Pending> pending;
  while (auto obj = reader.next()) {
    reader.only_fields(*obj, {"video_id", "frame", "score", "num_frames"});
    const std::string id = reader.string_field(*obj, "video_id");
    const FrameIndex frame = reader.int_field(*obj, "frame");
    const double score = reader.real_field(*obj, "score");
    if (frame < 0) reader.fail("frame", "negative frame index");
    if (!(score >= 0.0 && score <= 1.0)) reader.fail("score", "score outside [0, 1]");
    auto& video = pending[id];
    if (obj->contains("num_frames")) {
      const FrameIndex n = reader.int_field(*obj, "num_frames");
      if (n <= 0) reader.fail("num_frames", "must be positive");
      if (video.num_frames && *video.num_frames != n) {
        reader.fail("num_frames", "conflicts with line " + std::to_string(video.num_frames_line));
      }
      video.num_frames = n;
      video.num_frames_line = reader.line();
    }
    if (video.num_frames && frame >= *video.num_frames) reader.fail("frame", "frame >= num_frames");
    if (!video.entries.emplace(frame, score).second) {
      reader.fail("frame", "duplicate frame " + std::to_string(frame) + " for '" + id + "'");
    }
  }
  ScoreMap out;
  for (auto& [id, video] : pending) {
    const FrameIndex n = video.num_frames.value_or(video.entries.rbegin()->first + 1);
    if (video.entries.rbegin()->first >= n) {
      throw FileFormatError(video.num_frames_line, "frame", "frame >= num_frames for '" + id + "'");
    }
    out.emplace(id, FrameScoreSeries(id, n, std::move(video.entries)));
  }
  return out;
}

inline ScoreMap parse_frame_scores(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_frame_scores(in);
}

/// Ordered by video id, then frame.
inline void write_frame_scores(std::ostream& out, const ScoreMap& scores) {
  for (const auto& [id, series] : scores) {
    for (const auto& [frame, score] : series.entries()) {
      detail::Json obj;
      obj["video_id"] = series.video_id();
      obj["frame"] = frame;
      obj["score"] = round_significant(score);
      obj["num_frames"] = series.num_frames();
      out << obj.dump() << '\n';
    }
  }
}

inline void write_frame_scores(const std::string& path, const ScoreMap& scores) {
  auto out = detail::open_output(path);
  write_frame_scores(out, scores);
  detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Proposals

/// The order write_proposals uses within a video: confidence descending,
/// then start, then end.
inline void sort_proposals_for_output(std::vector<Proposal>& proposals) {
  std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.segment.start != b.segment.start) return a.segment.start < b.segment.start;
    return a.segment.end < b.segment.end;
  });
}

/// Proposals are kept in file order.
inline ProposalMap parse_proposals(std::istream& in) {
  detail::LineReader reader(in);
  ProposalMap out;
  while (auto obj = reader.next()) {
    reader.only_fields(*obj, {"video_id", "start", "end", "confidence"});
    const std::string id = reader.string_field(*obj, "video_id");
    Proposal p{{reader.int_field(*obj, "start"), reader.int_field(*obj, "end")},
               reader.real_field(*obj, "confidence")};
    if (p.segment.start < 0) reader.fail("start", "negative frame index");
    if (!p.segment.valid()) reader.fail("end", "start must be < end");
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) reader.fail("confidence", "outside [0, 1]");
    out[id].push_back(p);
  }
  return out;
}

inline ProposalMap parse_proposals(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_proposals(in);
}

/// Ordered by video id, then sort_proposals_for_output.
inline void write_proposals(std::ostream& out, const ProposalMap& proposals) {
  for (const auto& [id, list] : proposals) {
    auto sorted = list;
    sort_proposals_for_output(sorted);
    for (const auto& p : sorted) {
      validate_proposal(p);
      detail::Json obj;
      obj["video_id"] = id;
      obj["start"] = p.segment.start;
      obj["end"] = p.segment.end;
      obj["confidence"] = round_significant(p.confidence);
      out << obj.dump() << '\n';
    }
  }
}

inline void write_proposals(const std::string& path, const ProposalMap& proposals) {
  auto out = detail::open_output(path);
  write_proposals(out, proposals);
  detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Reports

inline std::string format_threshold(double t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

/// Metrics only (no timing), one JSON object, so reruns are byte-identical.
inline void write_report(std::ostream& out, const EvalReport& report) {
  detail::Json obj;
  obj["track"] = static_cast<int>(report.track);
  if (report.auc) obj["auc"] = round_significant(*report.auc);
  if (!report.ap_per_tiou.empty()) {
    detail::Json ap = detail::Json::object();
    double sum = 0.0;
    for (const auto& [t, v] : report.ap_per_tiou) {
      ap[format_threshold(t)] = round_significant(v);
      sum += v;
    }
    obj["ap"] = std::move(ap);
    obj["mean_ap"] = round_significant(sum / static_cast<double>(report.ap_per_tiou.size()));
  }
  if (report.ar_at_k) obj["ar_at_" + std::to_string(report.recall_top_k)] = round_significant(*report.ar_at_k);
  out << obj.dump(2) << '\n';
}

inline void write_report(const std::string& path, const EvalReport& report) {
  auto out = detail::open_output(path);
  write_report(out, report);
  detail::finish_output(out, path);
}

/// Human-readable summary with 9-decimal metrics and the wall-clock time.
inline void print_report(std::ostream& out, const EvalReport& report) {
  char buf[64];
  if (report.auc) {
    std::snprintf(buf, sizeof buf, "auc=%.9f\n", *report.auc);
    out << buf;
  }
  for (const auto& [t, v] : report.ap_per_tiou) {
    std::snprintf(buf, sizeof buf, "ap@%s=%.9f\n", format_threshold(t).c_str(), v);
    out << buf;
  }
  if (report.ar_at_k) {
    std::snprintf(buf, sizeof buf, "ar@%zu=%.9f\n", report.recall_top_k, *report.ar_at_k);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "time=%.3fs\n",
                std::chrono::duration<double>(report.runtime).count());
  out << buf;
}

}  // namespace forgeloc

#endif  // FORGELOC_IO_HPP_
