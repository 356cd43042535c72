#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "piezo/evolution.hpp"
#include "piezo/params.hpp"
#include "piezo/spectral.hpp"

namespace piezo::cli {

/// Syntax problems: unknown section or key, missing '=', unreadable number.
/// line() is 1-based; 0 means the file itself could not be read.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct KernelConfig {
  std::string kind = "exponential";  // or "tabulated"
  double k = 1.0;
  std::vector<double> s;
  std::vector<double> sigma;
  double d_sigma = 0.0;
};

struct ScanConfig {
  double lambda_min = 1.0;
  double lambda_max = 200.0;
  int points = 200;
  double tail_decades = 1.0;
  ResolventMethod method = ResolventMethod::Auto;
};

struct RunConfig {
  RawCoefficients coefficients;
  KernelConfig kernel;
  int n_x = 64;
  int n_s = 16;
  SimConfig sim;
  std::optional<FitWindow> fit_window;  // default: [5 L / wave speed, t_final]
  ScanConfig scan;
  int bound_probes = 50;
  std::optional<double> poincare_cp;  // default (2L/pi)^2
  std::filesystem::path output_dir = "out";
};

RunConfig parse_config(const std::string& text);
/// Throws ParseError(0, ...) if the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// Builds the kernel; throws piezo::Error (InvalidKernel) on bad tables.
MemoryKernel make_kernel(const KernelConfig& cfg);

}  // namespace piezo::cli
