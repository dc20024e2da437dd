#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyfilt {

// A per-step quantity for t = 1, 2, ...: either constant or an explicit
// sequence over t = 1..T.
template <class T>
class Schedule {
 public:
  Schedule() = default;

  static Schedule constant(T value) {
    Schedule s;
    s.values_.push_back(std::move(value));
    s.constant_ = true;
    return s;
  }

  static Schedule per_step(std::vector<T> values) {
    if (values.empty()) throw std::invalid_argument("Schedule::per_step needs at least one step");
    Schedule s;
    s.values_ = std::move(values);
    s.constant_ = false;
    return s;
  }

  bool is_constant() const { return constant_; }
  bool empty() const { return values_.empty(); }

  std::optional<int> horizon() const {
    if (constant_) return std::nullopt;
    return static_cast<int>(values_.size());
  }

  const T& at(int t) const {
    if (values_.empty()) throw std::logic_error("Schedule is empty");
    if (t < 1) throw std::out_of_range("Schedule::at: step index must be >= 1, got " + std::to_string(t));
    if (constant_) return values_.front();
    if (t > static_cast<int>(values_.size()))
      throw std::out_of_range("Schedule::at: step " + std::to_string(t) + " beyond horizon " +
                              std::to_string(values_.size()));
    return values_[static_cast<std::size_t>(t - 1)];
  }

  const std::vector<T>& values() const { return values_; }

  // Apply f to every stored value.
  template <class F>
  auto map(F&& f) const -> Schedule<decltype(f(std::declval<const T&>()))> {
    using U = decltype(f(std::declval<const T&>()));
    std::vector<U> out;
    out.reserve(values_.size());
    for (const auto& v : values_) out.push_back(f(v));
    if (constant_) return Schedule<U>::constant(std::move(out.front()));
    return Schedule<U>::per_step(std::move(out));
  }

 private:
  std::vector<T> values_;
  bool constant_ = true;
};

}  // namespace polyfilt
