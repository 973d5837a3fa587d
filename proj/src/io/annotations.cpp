#include "evnet/io/annotations.hpp"

#include "evnet/io/atomic_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace evnet::io {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  const char* seps = line.find(',') != std::string_view::npos ? "," : " \t";
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t next = line.find_first_of(seps, pos);
    const std::string_view field = line.substr(pos, next == std::string_view::npos ? line.size() - pos : next - pos);
    const auto first = field.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      const auto last = field.find_last_not_of(" \t\r");
      fields.push_back(field.substr(first, last - first + 1));
    } else if (seps[0] == ',') {
      fields.push_back({});  // empty CSV cell; rejected by the caller
    }
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return fields;
}

bool parse_long(std::string_view s, long& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::vector<AnnotationRecord> parse_annotations(std::istream& in, int dims) {
  if (dims < 1) throw std::invalid_argument("annotation dims must be positive");
  std::vector<AnnotationRecord> records;
  std::set<std::pair<long, long>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto fields = split_fields(std::string_view(line).substr(start));
    if (static_cast<int>(fields.size()) != 2 + dims) {
      throw std::invalid_argument("expected " + std::to_string(2 + dims) + " columns but found " +
                                  std::to_string(fields.size()) + " (line " + std::to_string(line_no) + ")");
    }
    AnnotationRecord rec;
    if (!parse_long(fields[0], rec.frame_id) || !parse_long(fields[1], rec.agent_id))
      throw ParseError("frame and agent ids must be integers", line_no);
    rec.values.resize(dims);
    for (int i = 0; i < dims; ++i) {
      if (!parse_double(fields[2 + i], rec.values(i)) || !std::isfinite(rec.values(i)))
        throw ParseError("malformed value '" + std::string(fields[2 + i]) + "'", line_no);
    }
    if (!seen.emplace(rec.frame_id, rec.agent_id).second)
      throw ParseError("duplicate (frame, agent) pair", line_no);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<Track> group_tracks(std::vector<AnnotationRecord> records, int frame_interval) {
  if (frame_interval < 1) throw std::invalid_argument("frame interval must be positive");
  std::map<long, std::vector<AnnotationRecord>> by_agent;
  for (auto& r : records) {
    if (r.frame_id % frame_interval != 0) continue;
    by_agent[r.agent_id].push_back(std::move(r));
  }
  std::vector<Track> tracks;
  for (auto& [agent, recs] : by_agent) {
    std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.frame_id < b.frame_id; });
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= recs.size(); ++i) {
      if (i < recs.size() && recs[i].frame_id == recs[i - 1].frame_id + frame_interval) continue;
      Track t;
      t.agent_id = agent;
      t.first_frame = recs[begin].frame_id;
      t.values.resize(static_cast<Eigen::Index>(i - begin), recs[begin].values.size());
      for (std::size_t j = begin; j < i; ++j) t.values.row(static_cast<Eigen::Index>(j - begin)) = recs[j].values;
      tracks.push_back(std::move(t));
      begin = i;
    }
  }
  return tracks;
}

std::vector<Track> load_annotations(const std::filesystem::path& path, int dims, int frame_interval) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open annotation file " + path.string());
  return group_tracks(parse_annotations(in, dims), frame_interval);
}

void save_annotations(const std::filesystem::path& path, const std::vector<Track>& tracks, int frame_interval) {
  std::ostringstream out;
  out.precision(17);
  out << "# frame_id agent_id values...\n";
  for (const Track& t : tracks) {
    for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
      out << t.first_frame + r * frame_interval << ' ' << t.agent_id;
      for (Eigen::Index c = 0; c < t.values.cols(); ++c) out << ' ' << t.values(r, c);
      out << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

}  // namespace evnet::io
