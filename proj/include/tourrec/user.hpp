#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/reclist.hpp"

namespace tourrec {

enum class Ordinal { age = 0, ac_deg = 1, budget = 2, accom = 3 };
enum class Nominal { gender = 0, job = 1, region = 2, group_comp = 3 };

inline constexpr std::size_t kOrdinalCount = 4;
inline constexpr std::size_t kNominalCount = 4;

const std::vector<std::string>& ordinal_levels(Ordinal attr);
const std::vector<std::string>& nominal_levels(Nominal attr);
std::string_view ordinal_name(Ordinal attr);
std::string_view nominal_name(Nominal attr);

/// Demographic record. All codes are 0-based level indices into the level
/// lists above; the users CSV writes ordinals 1-based as in the published
/// sample and nominals as labels.
struct UserRecord {
  UserId id = 0;
  std::array<int, kOrdinalCount> ordinal{};
  std::array<int, kNominalCount> nominal{};

  int at(Ordinal a) const { return ordinal[static_cast<std::size_t>(a)]; }
  int at(Nominal a) const { return nominal[static_cast<std::size_t>(a)]; }

  /// Throws InvariantError naming the first out-of-range code.
  void validate() const;
  bool operator==(const UserRecord&) const = default;
};

/// Maps an age value to its bin: 1..5 are bin codes (1-based), 18+ are years.
int age_bin_from_value(int value);

json user_to_json(const UserRecord& u);
/// Accepts codes (ordinals 1-based, nominals 0-based or labels) or labels.
UserRecord user_from_json(const json& value);

inline constexpr std::string_view kUsersCsvHeader = "UserID,Age,AcDeg,Budget,Accom,Gender,Job,Region,GroupComp";

std::string users_to_csv(const std::vector<UserRecord>& users);
std::vector<UserRecord> users_from_csv(std::string_view text);

/// Parses a nominal label case-insensitively, including the compact forms
/// used in the published sample ("2Adlt+Child", "GrpFriends").
int parse_nominal(Nominal attr, std::string_view label);

}  // namespace tourrec
