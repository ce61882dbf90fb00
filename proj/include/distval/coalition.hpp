#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace distval {

// Bitmask width bounds the player count for every path, sampled or exact.
inline constexpr int kMaxPlayers = 63;
inline constexpr int kDefaultEnumerationLimit = 20;

/// Largest n for which exact lattice enumeration is allowed. Initialized from
/// DISTVAL_ENUM_LIMIT when set, otherwise kDefaultEnumerationLimit.
int enumeration_limit();
void set_enumeration_limit(int limit);

/// Throws TooManyPlayers when n exceeds the enumeration limit.
void require_enumerable(int n_players);

/// A subset of [0, n) stored as a bitmask. Iteration order is ascending.
class Coalition {
 public:
  explicit Coalition(int n_players, std::uint64_t mask = 0);

  static Coalition from_members(int n_players, std::span<const int> members);
  /// Parses "0,2,5"; the empty string is the empty coalition.
  static Coalition from_key(int n_players, std::string_view key);
  static Coalition grand(int n_players);

  int n_players() const noexcept { return n_players_; }
  std::uint64_t mask() const noexcept { return mask_; }
  int size() const noexcept;
  bool empty() const noexcept { return mask_ == 0; }
  bool contains(int player) const noexcept;

  std::vector<int> members() const;
  std::string key() const;

  /// Adds a player; throws IndexOutOfRange / AlreadyMember.
  Coalition with(int player) const;
  /// Removes a player if present.
  Coalition without(int player) const;

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  int n_players_;
  std::uint64_t mask_;
};

Coalition coalition_insert(const Coalition& c, int player);

/// All 2^(n-1) subsets of [n] \ {excluded}, ascending by bitmask.
std::vector<Coalition> enumerate_subsets(int n_players, int excluded);

inline std::uint64_t full_mask(int n_players) {
  return n_players >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_players) - 1;
}

}  // namespace distval
