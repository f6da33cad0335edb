#include "aclock/rng.hpp"

#include <cmath>
#include <numbers>

namespace aclock {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStreamSalt = 0xd1b54a32d192ed03ULL;
} // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGolden) ^ mix64((stream + 1) * kStreamSalt))) {}

Rng::Rng(FromKey, std::uint64_t key) : key_(key) {}

Rng::result_type Rng::operator()() {
  // Two rounds of keyed mixing over the counter.
  const std::uint64_t c = counter_++;
  return mix64(mix64(c * kGolden + key_) ^ key_);
}

double Rng::uniform() {
  // 53 random bits mapped to (0, 1): never returns 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Rng Rng::split(std::uint64_t index) const {
  return Rng(FromKey{}, mix64(key_ ^ mix64((index + 1) * kStreamSalt + kGolden)));
}

} // namespace aclock
