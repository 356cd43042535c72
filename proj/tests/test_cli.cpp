#include <string>
#include <variant>

#include "config.hpp"
#include "doctest.h"
#include "output.hpp"
#include "piezo/error.hpp"

using namespace piezo;
using namespace piezo::cli;

namespace {

int parse_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  FAIL("expected ParseError");
  return -1;
}

}  // namespace

TEST_CASE("config parses every section") {
  const auto cfg = parse_config(R"(
# comment line
[params]
m = 0.25   # trailing comment
length = 0.5
[kernel]
kind = tabulated
s = 0, 1, 2
sigma = 1, 0.5, 0.25
d_sigma = 0.5
[grid]
n_x = 32
n_s = 8
[sim]
dt = 0.01
t_final = 3
record_every = 2
initial = sine
modes = 2, 0, 0, 0, 1
amplitude = 0.5
past_decay = none
fit_lo = 1
[scan]
lambda_min = 2
lambda_max = 20
points = 30
method = iterative
tail_decades = 0.5
[bounds]
poincare_cp = 0.3
probes = 5
[output]
dir = somewhere
)");
  CHECK(cfg.coefficients.m == 0.25);
  CHECK(cfg.coefficients.length == 0.5);
  CHECK(cfg.coefficients.rho == 1.0);
  CHECK(cfg.kernel.kind == "tabulated");
  CHECK(cfg.kernel.sigma.size() == 3);
  CHECK(cfg.n_x == 32);
  CHECK(cfg.n_s == 8);
  CHECK(cfg.sim.dt == 0.01);
  CHECK(cfg.sim.record_every == 2);
  CHECK_FALSE(cfg.sim.past.has_value());
  const auto* sine = std::get_if<SineModeInitial>(&cfg.sim.initial);
  REQUIRE(sine);
  CHECK(sine->modes[0] == 2);
  CHECK(sine->amplitude == 0.5);
  REQUIRE(cfg.fit_window.has_value());
  CHECK(cfg.fit_window->lo == 1.0);
  CHECK(cfg.fit_window->hi == 3.0);
  CHECK(cfg.scan.method == ResolventMethod::Iterative);
  CHECK(cfg.scan.points == 30);
  CHECK(*cfg.poincare_cp == 0.3);
  CHECK(cfg.bound_probes == 5);
  CHECK(cfg.output_dir == "somewhere");

  const auto k = make_kernel(cfg.kernel);
  CHECK(k.kind() == MemoryKernel::Kind::Tabulated);
}

TEST_CASE("defaults: random data, exponential kernel") {
  const auto cfg = parse_config("");
  CHECK(std::holds_alternative<SeededRandomInitial>(cfg.sim.initial));
  CHECK(cfg.kernel.kind == "exponential");
  CHECK_FALSE(cfg.fit_window.has_value());
  CHECK(cfg.sim.past.has_value());
}

TEST_CASE("parse errors carry the line number") {
  CHECK(parse_error_line("[params]\nm = 0.5\nrho 1\n") == 3);
  CHECK(parse_error_line("[params]\n\n\nm = x\n") == 4);
  CHECK(parse_error_line("[params]\nm = 0.5 0.6\n") == 2);
  CHECK(parse_error_line("m = 0.5\n") == 1);
  CHECK(parse_error_line("[nope]\n") == 1);
  CHECK(parse_error_line("[params\n") == 1);
  CHECK(parse_error_line("[grid]\nn_x = 3.5\n") == 2);
  CHECK(parse_error_line("[sim]\nmodes = 1, 0, 0\n") == 2);
  CHECK(parse_error_line("[sim]\ninitial = chaotic\n") == 2);
  CHECK(parse_error_line("[sim]\nbump_q = 0.5, 0.1, 1\n") == 2);
  CHECK(parse_error_line("[scan]\nmethod = magic\n") == 2);
  CHECK(parse_error_line("[kernel]\nkind = gaussian\n") == 2);
  CHECK(parse_error_line("[params]\nm =\n") == 2);
}

TEST_CASE("semantic problems pass the parser and fail in the library") {
  const auto cfg = parse_config("[kernel]\nkind = tabulated\ns = 0, 1, 2\nsigma = 1, 2, 0\nd_sigma = 1\n");
  try {
    make_kernel(cfg.kernel);
    FAIL("expected InvalidKernel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidKernel);
  }
  CHECK(parse_config("[params]\nm = 1.5\n").coefficients.m == 1.5);
}

TEST_CASE("number formatting round-trips") {
  CHECK(fmt(0.1) == "0.10000000000000001");
  CHECK(fmt(-0.0) == "0");
  CHECK(std::stod(fmt(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("svg has axes and one polyline per usable series") {
  const std::string svg = loglog_svg("t", "x", "y",
                                     {{"a", {1, 10, 100}, {1, 0.1, 0.01}},
                                      {"skipped", {1, 2}, {0, -1}},
                                      {"b", {1, 100}, {2, 3}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t lines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  CHECK(lines == 2);
  CHECK(svg.find("1e2") != std::string::npos);
  CHECK(svg.find("1e-2") != std::string::npos);
}
