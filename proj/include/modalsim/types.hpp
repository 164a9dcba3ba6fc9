// Copyright 2026 The modalsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MODALSIM_TYPES_HPP_
#define MODALSIM_TYPES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace modalsim {

// Transport modes. The declaration order is the canonical order used for
// every deterministic tie-break.
enum class Mode : std::uint8_t { kCar = 0, kBike, kBus, kWalk };

enum class Criterion : std::uint8_t {
  kEcology = 0,
  kComfort,
  kPrice,
  kPracticality,
  kTime,
  kSafety,
};

inline constexpr std::size_t kModeCount = 4;
inline constexpr std::size_t kCriterionCount = 6;

inline constexpr std::array<Mode, kModeCount> kAllModes{
    Mode::kCar, Mode::kBike, Mode::kBus, Mode::kWalk};

inline constexpr std::array<Criterion, kCriterionCount> kAllCriteria{
    Criterion::kEcology,      Criterion::kComfort, Criterion::kPrice,
    Criterion::kPracticality, Criterion::kTime,    Criterion::kSafety};

constexpr std::size_t index(Mode m) { return static_cast<std::size_t>(m); }
constexpr std::size_t index(Criterion c) { return static_cast<std::size_t>(c); }

std::string_view to_string(Mode m);
std::string_view to_string(Criterion c);

// Accepts the lower-case names produced by to_string ("car", "bike", ...).
std::optional<Mode> parse_mode(std::string_view name);
std::optional<Criterion> parse_criterion(std::string_view name);

// Raised for malformed user input (files, commands, scenario fields).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a model operation is called outside its domain.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Small value type indexed by Mode.
template <typename T>
struct PerMode {
  std::array<T, kModeCount> values{};

  constexpr T& operator[](Mode m) { return values[index(m)]; }
  constexpr const T& operator[](Mode m) const { return values[index(m)]; }

  friend bool operator==(const PerMode&, const PerMode&) = default;
};

// Bit set over the four modes.
class ModeSet {
 public:
  constexpr ModeSet() = default;
  constexpr ModeSet(std::initializer_list<Mode> modes) {
    for (Mode m : modes) insert(m);
  }

  static constexpr ModeSet all() { return ModeSet(std::uint8_t{0b1111}); }

  constexpr void insert(Mode m) { bits_ |= bit(m); }
  constexpr void erase(Mode m) { bits_ &= static_cast<std::uint8_t>(~bit(m)); }
  constexpr bool contains(Mode m) const { return (bits_ & bit(m)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const {
    std::size_t n = 0;
    for (Mode m : kAllModes) n += contains(m) ? 1 : 0;
    return n;
  }

  friend constexpr bool operator==(ModeSet, ModeSet) = default;

 private:
  explicit constexpr ModeSet(std::uint8_t bits) : bits_(bits) {}
  static constexpr std::uint8_t bit(Mode m) {
    return static_cast<std::uint8_t>(1u << index(m));
  }

  std::uint8_t bits_ = 0;
};

// One value per criterion: priority weights, or a row of per-criterion
// scores. Entries live on the 0-100 scale.
struct CriteriaVector {
  std::array<double, kCriterionCount> values{};

  constexpr double& operator[](Criterion c) { return values[index(c)]; }
  constexpr double operator[](Criterion c) const { return values[index(c)]; }

  double sum() const;

  friend bool operator==(const CriteriaVector&, const CriteriaVector&) =
      default;
};

// A 4x6 table keyed by (mode, criterion). Used for objective layouts,
// perceived values and perception filters alike.
class ModeGrid {
 public:
  constexpr ModeGrid() = default;

  static ModeGrid filled(double v);

  constexpr double& operator()(Mode m, Criterion c) {
    return cells_[index(m) * kCriterionCount + index(c)];
  }
  constexpr double operator()(Mode m, Criterion c) const {
    return cells_[index(m) * kCriterionCount + index(c)];
  }

  CriteriaVector row(Mode m) const;
  void set_row(Mode m, const CriteriaVector& row);

  const std::array<double, kModeCount * kCriterionCount>& cells() const {
    return cells_;
  }
  std::array<double, kModeCount * kCriterionCount>& cells() { return cells_; }

  // True when every entry lies in [lo, hi].
  bool within(double lo, double hi) const;

  friend bool operator==(const ModeGrid&, const ModeGrid&) = default;

 private:
  std::array<double, kModeCount * kCriterionCount> cells_{};
};

// Bounds shared across modules.
inline constexpr double kValueMin = 0.0;
inline constexpr double kValueMax = 100.0;
inline constexpr double kFilterMin = 0.5;
inline constexpr double kFilterMax = 1.95;

using Prototypes = PerMode<ModeGrid>;

}  // namespace modalsim

#endif  // MODALSIM_TYPES_HPP_
