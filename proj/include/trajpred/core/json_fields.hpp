#pragma once

#include <set>
#include <string>

#include "json.hpp"
#include "trajpred/core/error.hpp"

namespace trajpred {

/// Reads optional fields from a JSON object and rejects keys nobody asked for.
///
///   JsonFields f(j, "train");
///   f.get("epochs", cfg.epochs);
///   f.finish();  // InvalidInput on unknown keys
class JsonFields {
 public:
  JsonFields(const nlohmann::json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw InvalidInput(context_ + ": expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidInput(context_ + "." + key + ": wrong type");
    }
  }

  /// Sub-object, if present.
  const nlohmann::json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw InvalidInput("unknown config key '" + context_ + "." + it.key() + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace trajpred
