#include "tourrec/user.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "tourrec/error.hpp"

namespace tourrec {

namespace {

const std::array<std::vector<std::string>, kOrdinalCount> kOrdinalLevels = {{
    {"18-30", "31-40", "41-50", "51-60", "60+"},
    {"None", "High School", "Some College", "College Degree"},
    {"Low", "Mid", "High"},
    {"Single", "Double", "Suite", "Villa"},
}};

const std::array<std::vector<std::string>, kNominalCount> kNominalLevels = {{
    {"Male", "Female"},
    {"Blue Collar", "White Collar"},
    {"South Europe", "North Europe", "East Europe", "North America", "South America", "Asia", "Africa",
     "Middle East"},
    {"1 Adult", "2 Adults", "2 Adults + Child", "Group of Friends"},
}};

// Spellings used by the CSV writer.
const std::array<std::vector<std::string>, kNominalCount> kCsvLabels = {{
    {"Male", "Female"},
    {"blue collar", "white collar"},
    {"South Europe", "North Europe", "East Europe", "North America", "South America", "Asia", "Africa",
     "Middle East"},
    {"1Adlt", "2Adlt", "2Adlt+Child", "GrpFriends"},
}};

constexpr std::array<std::string_view, kOrdinalCount> kOrdinalNames = {"age", "ac_deg", "budget", "accom"};
constexpr std::array<std::string_view, kNominalCount> kNominalNames = {"gender", "job", "region", "group_comp"};

std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '+') {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw InvariantError("empty integer field");
  std::size_t used = 0;
  const int value = std::stoi(std::string(s), &used);
  if (used != s.size()) throw InvariantError("not an integer: '" + std::string(s) + "'");
  return value;
}

bool is_integer(std::string_view s) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '-') s.remove_prefix(1);
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

int ordinal_from_code(Ordinal attr, int one_based) {
  const int levels = static_cast<int>(ordinal_levels(attr).size());
  if (one_based < 1 || one_based > levels) {
    throw InvariantError(std::string(ordinal_name(attr)) + " code " + std::to_string(one_based) + " outside 1.." +
                         std::to_string(levels));
  }
  return one_based - 1;
}

int ordinal_from_label(Ordinal attr, std::string_view label) {
  const auto& levels = ordinal_levels(attr);
  const std::string key = fold(label);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (fold(levels[i]) == key) return static_cast<int>(i);
  }
  throw InvariantError("unknown " + std::string(ordinal_name(attr)) + " level '" + std::string(label) + "'");
}

}  // namespace

const std::vector<std::string>& ordinal_levels(Ordinal attr) { return kOrdinalLevels[static_cast<std::size_t>(attr)]; }
const std::vector<std::string>& nominal_levels(Nominal attr) { return kNominalLevels[static_cast<std::size_t>(attr)]; }
std::string_view ordinal_name(Ordinal attr) { return kOrdinalNames[static_cast<std::size_t>(attr)]; }
std::string_view nominal_name(Nominal attr) { return kNominalNames[static_cast<std::size_t>(attr)]; }

void UserRecord::validate() const {
  for (std::size_t a = 0; a < kOrdinalCount; ++a) {
    const int levels = static_cast<int>(kOrdinalLevels[a].size());
    if (ordinal[a] < 0 || ordinal[a] >= levels) {
      throw InvariantError("user " + std::to_string(id) + ": " + std::string(kOrdinalNames[a]) + " code " +
                           std::to_string(ordinal[a]) + " out of range");
    }
  }
  for (std::size_t a = 0; a < kNominalCount; ++a) {
    const int levels = static_cast<int>(kNominalLevels[a].size());
    if (nominal[a] < 0 || nominal[a] >= levels) {
      throw InvariantError("user " + std::to_string(id) + ": " + std::string(kNominalNames[a]) + " code " +
                           std::to_string(nominal[a]) + " out of range");
    }
  }
}

int age_bin_from_value(int value) {
  if (value >= 1 && value <= 5) return value - 1;
  if (value < 18) throw InvariantError("age " + std::to_string(value) + " is neither a bin code (1-5) nor an adult age");
  if (value <= 30) return 0;
  if (value <= 40) return 1;
  if (value <= 50) return 2;
  if (value <= 60) return 3;
  return 4;
}

int parse_nominal(Nominal attr, std::string_view label) {
  const std::size_t a = static_cast<std::size_t>(attr);
  const std::string key = fold(label);
  for (const auto* table : {&kNominalLevels[a], &kCsvLabels[a]}) {
    for (std::size_t i = 0; i < table->size(); ++i) {
      if (fold((*table)[i]) == key) return static_cast<int>(i);
    }
  }
  throw InvariantError("unknown " + std::string(nominal_name(attr)) + " level '" + std::string(label) + "'");
}

json user_to_json(const UserRecord& u) {
  json out = {{"id", u.id}};
  for (std::size_t a = 0; a < kOrdinalCount; ++a) out[std::string(kOrdinalNames[a])] = u.ordinal[a] + 1;
  for (std::size_t a = 0; a < kNominalCount; ++a) out[std::string(kNominalNames[a])] = kNominalLevels[a][u.nominal[a]];
  return out;
}

UserRecord user_from_json(const json& v) {
  if (!v.is_object()) throw InvariantError("user must be a JSON object");
  UserRecord u;
  u.id = v.value("id", UserId{0});
  for (std::size_t a = 0; a < kOrdinalCount; ++a) {
    const std::string key(kOrdinalNames[a]);
    if (!v.contains(key)) throw InvariantError("user is missing '" + key + "'");
    const auto& field = v[key];
    const auto attr = static_cast<Ordinal>(a);
    if (field.is_number_integer()) {
      const int value = field.get<int>();
      u.ordinal[a] = attr == Ordinal::age ? age_bin_from_value(value) : ordinal_from_code(attr, value);
    } else if (field.is_string()) {
      u.ordinal[a] = ordinal_from_label(attr, field.get<std::string>());
    } else {
      throw InvariantError("'" + key + "' must be an integer code or a level label");
    }
  }
  for (std::size_t a = 0; a < kNominalCount; ++a) {
    const std::string key(kNominalNames[a]);
    if (!v.contains(key)) throw InvariantError("user is missing '" + key + "'");
    const auto& field = v[key];
    if (field.is_number_integer()) {
      u.nominal[a] = field.get<int>();
    } else if (field.is_string()) {
      u.nominal[a] = parse_nominal(static_cast<Nominal>(a), field.get<std::string>());
    } else {
      throw InvariantError("'" + key + "' must be an integer code or a level label");
    }
  }
  u.validate();
  return u;
}

std::string users_to_csv(const std::vector<UserRecord>& users) {
  std::ostringstream out;
  out << kUsersCsvHeader << '\n';
  for (const auto& u : users) {
    out << u.id;
    for (std::size_t a = 0; a < kOrdinalCount; ++a) out << ',' << u.ordinal[a] + 1;
    for (std::size_t a = 0; a < kNominalCount; ++a) out << ',' << kCsvLabels[a][u.nominal[a]];
    out << '\n';
  }
  return out.str();
}

std::vector<UserRecord> users_from_csv(std::string_view text) {
  std::vector<UserRecord> users;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line_no == 1) {
      if (fold(line) != fold(kUsersCsvHeader)) throw ParseError("expected header '" + std::string(kUsersCsvHeader) + "'", 1);
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 1 + kOrdinalCount + kNominalCount) {
      throw ParseError("expected 9 fields, got " + std::to_string(fields.size()), line_no);
    }
    UserRecord u;
    std::size_t column = 1;
    try {
      u.id = std::stoll(std::string(trim(fields[0])));
      for (std::size_t a = 0; a < kOrdinalCount; ++a) {
        column = a + 2;
        const auto attr = static_cast<Ordinal>(a);
        if (is_integer(fields[column - 1])) {
          const int value = parse_int(fields[column - 1]);
          u.ordinal[a] = attr == Ordinal::age ? age_bin_from_value(value) : ordinal_from_code(attr, value);
        } else {
          u.ordinal[a] = ordinal_from_label(attr, trim(fields[column - 1]));
        }
      }
      for (std::size_t a = 0; a < kNominalCount; ++a) {
        column = a + 2 + kOrdinalCount;
        const std::string_view raw = trim(fields[column - 1]);
        u.nominal[a] = is_integer(raw) ? parse_int(raw) : parse_nominal(static_cast<Nominal>(a), raw);
      }
      u.validate();
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no, column);
    }
    users.push_back(u);
  }
  return users;
}

}  // namespace tourrec
