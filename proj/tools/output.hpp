#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace piezo::cli {

/// %.17g, so CSV values round-trip and reruns are byte-identical.
std::string fmt(double x);

/// Writes text, creating parent directories. Throws std::runtime_error.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log line plot. Points with non-positive or non-finite coordinates are
/// skipped; a series with fewer than two usable points is left out.
std::string loglog_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series);

}  // namespace piezo::cli
