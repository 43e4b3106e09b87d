#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/reclist.hpp"

namespace tourrec {

enum class EventKind { user_created, preferences_set, feedback, rating, item_added };

std::string to_string(EventKind kind);
/// Throws InvariantError on an unknown name.
EventKind event_kind_from_string(const std::string& name);

struct Event {
  std::uint64_t seq = 0;
  Timestamp timestamp = 0;
  EventKind kind = EventKind::user_created;
  json payload;

  bool operator==(const Event&) const = default;
};

json event_to_json(const Event& e);
Event event_from_json(const json& v);

std::uint32_t crc32_of(std::string_view bytes);

/// One record: "<byte length> <crc32 as 8 hex digits> <json>\n".
std::string encode_record(const Event& e);
/// Parses one record without its trailing newline. `line` feeds error messages.
Event decode_record(std::string_view record, std::size_t line = 0);

std::vector<Event> parse_event_log(std::string_view text);
std::vector<Event> read_event_log(const std::string& path);
std::string encode_event_log(const std::vector<Event>& events);

/// Throws InvariantError naming the first missing sequence number when the
/// events do not continue exactly from `after`.
void check_contiguous(const std::vector<Event>& events, std::uint64_t after);

/// Append-only log file. With `durable` set every append is flushed and
/// fsync'ed before returning, which is the acknowledgment point.
class EventLogWriter {
 public:
  EventLogWriter(const std::string& path, bool durable);
  ~EventLogWriter();
  EventLogWriter(const EventLogWriter&) = delete;
  EventLogWriter& operator=(const EventLogWriter&) = delete;

  void append(const Event& e);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  bool durable_;
  int fd_ = -1;
};

inline constexpr int kSnapshotVersion = 1;

struct Snapshot {
  int version = kSnapshotVersion;
  /// Sequence number of the last event folded into `state`.
  std::uint64_t high_water = 0;
  json state;
};

/// {"version", "high_water", "state", "checksum"} with crc32 over the
/// serialized state.
std::string encode_snapshot(const Snapshot& s);
/// Throws InvariantError on a checksum mismatch or unknown version.
Snapshot decode_snapshot(std::string_view text);
void write_snapshot_file(const std::string& path, const Snapshot& s);
Snapshot read_snapshot_file(const std::string& path);

}  // namespace tourrec
