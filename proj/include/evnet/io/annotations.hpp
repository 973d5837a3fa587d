#pragma once

#include "evnet/trajectory.hpp"

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace evnet::io {

struct AnnotationRecord {
  long frame_id = 0;
  long agent_id = 0;
  Eigen::RowVectorXd values;
};

/// One contiguous run of an agent's frames.
struct Track {
  long agent_id = 0;
  long first_frame = 0;
  Trajectory values;
};

/// Malformed annotation input; `line()` is 1-based.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, int line)
      : std::invalid_argument(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Reads `frame_id agent_id v1 .. vM` rows. Fields may be separated by
/// commas, tabs or spaces; blank lines and lines starting with '#' are
/// skipped. Throws ParseError on malformed rows, duplicate
/// (frame, agent) pairs, or non-finite values, and std::invalid_argument
/// when a row has the wrong number of values.
std::vector<AnnotationRecord> parse_annotations(std::istream& in, int dims);

/// Groups records by agent, orders them by frame, keeps frames that are
/// multiples of `frame_interval`, and splits a track wherever a retained
/// frame is missing. Tracks are ordered by (agent, first frame).
std::vector<Track> group_tracks(std::vector<AnnotationRecord> records, int frame_interval);

std::vector<Track> load_annotations(const std::filesystem::path& path, int dims, int frame_interval = 1);

/// Writes tracks in the canonical space-separated layout (frames numbered
/// from each track's first frame in steps of `frame_interval`).
void save_annotations(const std::filesystem::path& path, const std::vector<Track>& tracks, int frame_interval = 1);

}  // namespace evnet::io
