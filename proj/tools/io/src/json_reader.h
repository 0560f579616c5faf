// Copyright 2026 The Micropack Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MICROPACK_IO_JSON_READER_H_
#define MICROPACK_IO_JSON_READER_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "micropack/errors.h"

namespace micropack::io {

// Typed access to one JSON object that remembers which keys were read, so
// that finish() can reject the rest. Errors carry the JSON pointer.
class JsonReader {
 public:
  using Json = nlohmann::ordered_json;

  JsonReader(const Json& obj, std::string pointer) : obj_(obj), pointer_(std::move(pointer)) {
    if (!obj_.is_object()) throw ParseError(where(), "expected an object");
  }

  const std::string& pointer() const { return pointer_; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  bool is_null(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key).is_null();
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ParseError(pointer_ + "/" + key, "missing field");
    return convert<T>(obj_.at(key), pointer_ + "/" + key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    return has(key) ? require<T>(key) : fallback;
  }

  std::string get(const std::string& key, const char* fallback) {
    return get<std::string>(key, std::string(fallback));
  }

  // Nested object, or nullopt when absent.
  std::optional<JsonReader> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    seen_.insert(key);
    return JsonReader(obj_.at(key), pointer_ + "/" + key);
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ParseError(pointer_ + "/" + key, "missing field");
    return obj_.at(key);
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) throw ParseError(pointer_ + "/" + item.key(), "unknown field");
    }
  }

  template <typename T>
  static T convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ParseError(where, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ParseError(where, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        throw ParseError(where, "expected a nonnegative integer");
      } else {
        if (v.is_number_unsigned() &&
            v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
          throw ParseError(where, "integer out of range");
        }
        const auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) {
          throw ParseError(where, "integer out of range");
        }
        return static_cast<T>(x);
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ParseError(where, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ParseError(where, "expected a string");
      return v.get<std::string>();
    } else {
      static_assert(std::is_same_v<T, std::vector<typename T::value_type>>);
      if (!v.is_array()) throw ParseError(where, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], where + "/" + std::to_string(i)));
      }
      return out;
    }
  }

 private:
  std::string where() const { return pointer_.empty() ? "/" : pointer_; }

  const Json& obj_;
  std::string pointer_;
  std::set<std::string> seen_;
};

}  // namespace micropack::io

#endif  // MICROPACK_IO_JSON_READER_H_
