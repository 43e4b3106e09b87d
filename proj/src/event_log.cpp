#include "tourrec/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "tourrec/error.hpp"

namespace tourrec {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string hex8(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

}  // namespace

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::user_created: return "user_created";
    case EventKind::preferences_set: return "preferences_set";
    case EventKind::feedback: return "feedback";
    case EventKind::rating: return "rating";
    case EventKind::item_added: return "item_added";
  }
  return "unknown";
}

EventKind event_kind_from_string(const std::string& name) {
  for (auto k : {EventKind::user_created, EventKind::preferences_set, EventKind::feedback, EventKind::rating,
                 EventKind::item_added}) {
    if (to_string(k) == name) return k;
  }
  throw InvariantError("unknown event kind '" + name + "'");
}

json event_to_json(const Event& e) {
  return {{"seq", e.seq}, {"ts", e.timestamp}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

Event event_from_json(const json& v) {
  Event e;
  try {
    e.seq = v.at("seq").get<std::uint64_t>();
    e.timestamp = v.at("ts").get<Timestamp>();
    e.kind = event_kind_from_string(v.at("kind").get<std::string>());
    e.payload = v.at("payload");
  } catch (const json::exception& ex) {
    throw InvariantError(std::string("malformed event: ") + ex.what());
  }
  return e;
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string encode_record(const Event& e) {
  const std::string body = event_to_json(e).dump();
  return std::to_string(body.size()) + " " + hex8(crc32_of(body)) + " " + body + "\n";
}

Event decode_record(std::string_view record, std::size_t line) {
  const auto sp1 = record.find(' ');
  if (sp1 == std::string_view::npos) throw ParseError("record lacks a length prefix", line, 1);
  const auto sp2 = record.find(' ', sp1 + 1);
  if (sp2 == std::string_view::npos) throw ParseError("record lacks a checksum", line, sp1 + 2);
  std::size_t len = 0;
  auto [p, ec] = std::from_chars(record.data(), record.data() + sp1, len);
  if (ec != std::errc() || p != record.data() + sp1) throw ParseError("malformed length prefix", line, 1);
  std::uint32_t crc = 0;
  auto [q, ec2] = std::from_chars(record.data() + sp1 + 1, record.data() + sp2, crc, 16);
  if (ec2 != std::errc() || q != record.data() + sp2 || sp2 - sp1 - 1 != 8) {
    throw ParseError("malformed checksum", line, sp1 + 2);
  }
  const std::string_view body = record.substr(sp2 + 1);
  if (body.size() != len) throw ParseError("record length mismatch (truncated record?)", line, sp2 + 2);
  if (crc32_of(body) != crc) throw ParseError("record checksum mismatch", line, sp1 + 2);
  json v;
  try {
    v = json::parse(body);
  } catch (const json::parse_error& ex) {
    throw ParseError(std::string("record is not JSON: ") + ex.what(), line, sp2 + 2);
  }
  try {
    return event_from_json(v);
  } catch (const InvariantError& ex) {
    throw ParseError(ex.what(), line, sp2 + 2);
  }
}

std::vector<Event> parse_event_log(std::string_view text) {
  std::vector<Event> out;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view record = text.substr(pos, nl - pos);
    if (!record.empty()) out.push_back(decode_record(record, line));
    pos = nl + 1;
  }
  return out;
}

std::vector<Event> read_event_log(const std::string& path) {
  try {
    return parse_event_log(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::string encode_event_log(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) out += encode_record(e);
  return out;
}

void check_contiguous(const std::vector<Event>& events, std::uint64_t after) {
  std::uint64_t expected = after + 1;
  for (const auto& e : events) {
    if (e.seq != expected) {
      throw InvariantError("event log gap: missing sequence number " + std::to_string(expected));
    }
    ++expected;
  }
}

EventLogWriter::EventLogWriter(const std::string& path, bool durable) : path_(path), durable_(durable) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd_ < 0) throw Error("cannot open event log '" + path + "': " + std::strerror(errno));
}

EventLogWriter::~EventLogWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void EventLogWriter::append(const Event& e) {
  const std::string record = encode_record(e);
  std::size_t done = 0;
  while (done < record.size()) {
    const ssize_t n = ::write(fd_, record.data() + done, record.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("write to event log failed: " + std::string(std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
  if (durable_ && ::fsync(fd_) != 0) throw Error("fsync of event log failed: " + std::string(std::strerror(errno)));
}

std::string encode_snapshot(const Snapshot& s) {
  const std::string state = s.state.dump();
  json doc = {{"version", s.version}, {"high_water", s.high_water}, {"checksum", hex8(crc32_of(state))}};
  doc["state"] = s.state;
  return doc.dump() + "\n";
}

Snapshot decode_snapshot(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("snapshot is not JSON: ") + e.what(), 0);
  }
  Snapshot s;
  try {
    s.version = doc.at("version").get<int>();
    s.high_water = doc.at("high_water").get<std::uint64_t>();
    s.state = doc.at("state");
    const std::string checksum = doc.at("checksum").get<std::string>();
    if (s.version != kSnapshotVersion) throw InvariantError("unsupported snapshot version " + std::to_string(s.version));
    if (hex8(crc32_of(s.state.dump())) != checksum) throw InvariantError("snapshot checksum mismatch");
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed snapshot: ") + e.what(), 0);
  }
  return s;
}

void write_snapshot_file(const std::string& path, const Snapshot& s) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write snapshot '" + tmp + "'");
    out << encode_snapshot(s);
    if (!out) throw Error("cannot write snapshot '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot move snapshot into place at '" + path + "'");
}

Snapshot read_snapshot_file(const std::string& path) { return decode_snapshot(read_file(path)); }

}  // namespace tourrec
