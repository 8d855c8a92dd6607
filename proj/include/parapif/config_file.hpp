// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// INI configuration files, read with boost::program_options into the flat
// key map of harness.hpp. Section headers become key prefixes:
//
//   [fine]
//   dt = 0.05      ->  "fine.dt" = "0.05"

#pragma once

#include <fstream>
#include <istream>
#include <string>

#include <boost/program_options/parsers.hpp>

#include "parapif/harness.hpp"

namespace parapif::harness {

inline RawConfig parse_config(std::istream& in) {
  namespace po = boost::program_options;
  po::options_description none;
  po::parsed_options parsed(nullptr);
  try {
    parsed = po::parse_config_file(in, none, /*allow_unregistered=*/true);
  } catch (const po::error& e) {
    throw ConfigError({}, std::string("malformed configuration: ") + e.what());
  }
  RawConfig raw;
  for (const auto& opt : parsed.options) {
    const std::string value = opt.value.empty() ? "" : opt.value.front();
    if (!raw.emplace(opt.string_key, value).second) throw ConfigError({opt.string_key}, "key given more than once");
  }
  return raw;
}

inline RawConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({}, "cannot open configuration file " + path);
  return parse_config(in);
}

}  // namespace parapif::harness
