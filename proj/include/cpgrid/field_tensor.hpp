#pragma once

#include <cmath>
#include <cstddef>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpgrid/error.hpp"
#include "cpgrid/grid_spec.hpp"

namespace cpgrid {

/// First flat index holding NaN (or +-inf unless allow_infinite), if any.
inline std::optional<std::size_t> first_invalid(std::span<const double> data,
                                                bool allow_infinite = false) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = data[i];
    if (std::isnan(v) || (!allow_infinite && std::isinf(v))) return i;
  }
  return std::nullopt;
}

/// Dense, finite, immutable 4D field laid out row-major as (t, x, y, var).
class FieldTensor {
 public:
  FieldTensor() = default;

  FieldTensor(GridSpec spec, std::vector<double> data)
      : spec_(std::move(spec)), data_(std::move(data)) {
    spec_.validate();
    if (data_.size() != spec_.cell_count()) {
      throw ValidationError("FieldTensor: data length " +
                            std::to_string(data_.size()) + " != cell count " +
                            std::to_string(spec_.cell_count()));
    }
    if (auto bad = first_invalid(data_)) {
      throw ValidationError("FieldTensor: non-finite value at flat index " +
                            std::to_string(*bad));
    }
  }

  static FieldTensor filled(const GridSpec& spec, double value) {
    return FieldTensor(spec, std::vector<double>(spec.cell_count(), value));
  }

  const GridSpec& spec() const noexcept { return spec_; }
  std::span<const double> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator[](std::size_t flat) const noexcept { return data_[flat]; }

  double at(std::size_t t, std::size_t x, std::size_t y, std::size_t v) const {
    return data_[cell_index(spec_, t, x, y, v)];
  }

  /// Bitwise comparison of spec and payload.
  bool bitwise_equal(const FieldTensor& other) const {
    return spec_ == other.spec_ && data_.size() == other.data_.size() &&
           (data_.empty() ||
            std::memcmp(data_.data(), other.data_.data(),
                        data_.size() * sizeof(double)) == 0);
  }

 private:
  GridSpec spec_;
  std::vector<double> data_;
};

}  // namespace cpgrid
