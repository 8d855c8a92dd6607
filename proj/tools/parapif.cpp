// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// parapif run <config.ini> [--output-dir DIR]
// parapif schema
//
// Exit codes: 0 ok, 1 other failure, 2 invalid configuration, 3 numeric
// failure.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "parapif/config_file.hpp"
#include "parapif/harness.hpp"

int main(int argc, char** argv) {
  namespace h = parapif::harness;
  CLI::App app{"parapif: parallel-in-time particle-in-Fourier runs"};
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "execute a configuration file");
  run->add_option("config", config, "INI configuration file")->required();
  run->add_option("-o,--output-dir", output_dir, "output directory (overrides run.output_dir)");

  auto* schema = app.add_subcommand("schema", "list configuration keys and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kConfig;
  }

  if (schema->parsed()) {
    for (const auto& k : h::schema()) std::cout << k.key << " = " << k.fallback << "  ; " << k.help << '\n';
    return 0;
  }

  h::RawConfig raw;
  try {
    raw = h::read_config_file(config);
  } catch (const h::ConfigError& e) {
    std::cerr << "error category=schema key=" << h::detail::join(e.keys()) << " message=" << h::detail::quoted(e.what())
              << '\n';
    return h::kConfig;
  }
  std::optional<std::string> dir;
  if (!output_dir.empty()) dir = output_dir;
  return h::run(raw, dir, std::cerr);
}
