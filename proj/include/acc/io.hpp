#pragma once

// Instance JSON (1-based indices):
// {"N","K","F","r","field_order",
//  "caches":[[[n,f],...] per user],
//  "requests":[{"user","arrival","slack","demand","parts"?}],
//  "virtual_users"?: bool}

#include <string>

#include "acc/model.hpp"

namespace acc::io {

Instance instance_from_json(const std::string& text);
std::string instance_to_json(const Instance& instance);

Instance load_instance(const std::string& path);
void save_text(const std::string& path, const std::string& text);

}  // namespace acc::io
