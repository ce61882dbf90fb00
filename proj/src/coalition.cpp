#include "distval/coalition.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cstdlib>

#include "distval/error.hpp"

namespace distval {

namespace {

int initial_limit() {
  if (const char* env = std::getenv("DISTVAL_ENUM_LIMIT")) {
    int value = 0;
    std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size() && value >= 1 &&
        value <= kMaxPlayers) {
      return value;
    }
  }
  return kDefaultEnumerationLimit;
}

std::atomic<int>& limit_storage() {
  static std::atomic<int> limit{initial_limit()};
  return limit;
}

void check_player_count(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "player count must be positive");
  if (n > kMaxPlayers) {
    throw Error(ErrorCode::too_many_players,
                std::to_string(n) + " players exceeds bitmask width " +
                    std::to_string(kMaxPlayers));
  }
}

}  // namespace

int enumeration_limit() { return limit_storage().load(); }

void set_enumeration_limit(int limit) {
  if (limit < 1 || limit > kMaxPlayers) {
    throw Error(ErrorCode::invalid_argument, "enumeration limit out of range");
  }
  limit_storage().store(limit);
}

void require_enumerable(int n_players) {
  if (n_players > enumeration_limit()) {
    throw Error(ErrorCode::too_many_players,
                std::to_string(n_players) + " players exceeds exact-enumeration limit " +
                    std::to_string(enumeration_limit()));
  }
}

Coalition::Coalition(int n_players, std::uint64_t mask) : n_players_(n_players), mask_(mask) {
  check_player_count(n_players);
  if ((mask & ~full_mask(n_players)) != 0) {
    throw Error(ErrorCode::index_out_of_range, "coalition mask has bits beyond n_players");
  }
}

Coalition Coalition::from_members(int n_players, std::span<const int> members) {
  Coalition c(n_players);
  for (int m : members) c = c.with(m);
  return c;
}

Coalition Coalition::from_key(int n_players, std::string_view key) {
  Coalition c(n_players);
  if (key.empty()) return c;
  std::size_t pos = 0;
  int previous = -1;
  while (pos <= key.size()) {
    std::size_t comma = key.find(',', pos);
    if (comma == std::string_view::npos) comma = key.size();
    std::string_view token = key.substr(pos, comma - pos);
    int index = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), index);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw Error(ErrorCode::spec_validation, "malformed coalition key '" + std::string(key) + "'");
    }
    if (index <= previous) {
      throw Error(ErrorCode::spec_validation,
                  "coalition key '" + std::string(key) + "' is not strictly ascending");
    }
    c = c.with(index);
    previous = index;
    pos = comma + 1;
  }
  return c;
}

Coalition Coalition::grand(int n_players) { return Coalition(n_players, full_mask(n_players)); }

int Coalition::size() const noexcept { return std::popcount(mask_); }

bool Coalition::contains(int player) const noexcept {
  return player >= 0 && player < n_players_ && ((mask_ >> player) & 1U) != 0;
}

std::vector<int> Coalition::members() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

std::string Coalition::key() const {
  std::string out;
  for (int m : members()) {
    if (!out.empty()) out += ',';
    out += std::to_string(m);
  }
  return out;
}

Coalition Coalition::with(int player) const {
  if (player < 0 || player >= n_players_) {
    throw Error(ErrorCode::index_out_of_range,
                "player " + std::to_string(player) + " not in [0, " + std::to_string(n_players_) +
                    ")");
  }
  if (contains(player)) {
    throw Error(ErrorCode::already_member,
                "player " + std::to_string(player) + " already in {" + key() + "}");
  }
  return Coalition(n_players_, mask_ | (std::uint64_t{1} << player));
}

Coalition Coalition::without(int player) const {
  if (!contains(player)) return *this;
  return Coalition(n_players_, mask_ & ~(std::uint64_t{1} << player));
}

Coalition coalition_insert(const Coalition& c, int player) { return c.with(player); }

std::vector<Coalition> enumerate_subsets(int n_players, int excluded) {
  check_player_count(n_players);
  require_enumerable(n_players);
  if (excluded < 0 || excluded >= n_players) {
    throw Error(ErrorCode::index_out_of_range, "excluded player out of range");
  }
  // Enumerate (n-1)-bit masks and spread them around the excluded bit.
  const std::uint64_t low = (std::uint64_t{1} << excluded) - 1;
  const std::uint64_t count = std::uint64_t{1} << (n_players - 1);
  std::vector<Coalition> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint64_t mask = (k & low) | ((k & ~low) << 1);
    out.emplace_back(n_players, mask);
  }
  return out;
}

}  // namespace distval
