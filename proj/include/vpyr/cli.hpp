#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vpyr/piecewise_map.hpp"
#include "vpyr/segment_set.hpp"

namespace vpyr {

struct RunConfig {
  std::string command;  // cover, build, verify, energy, accordion, plot
  std::string domain;   // domain spec path
  std::vector<int> depths{6};
  std::vector<double> alphas{1.0};
  std::vector<double> deltas;
  std::vector<double> hs;
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  bool certify_tail = false;
  // covering limits
  int max_squares = 64;
  int steps = 6;
  int levels = 5;
  std::size_t samples = 10000;
  // accordion
  int frames = 5;
  std::string sequence = "harmonic";
};

// Exit codes of run_command.
enum ExitCode { kOk = 0, kInputError = 2, kPrecondition = 3, kInternal = 4 };

// Commands throw on failure; run_command maps exceptions to exit codes and
// prints the message to err.
void cmd_cover(const RunConfig& cfg, std::ostream& out);
void cmd_build(const RunConfig& cfg, std::ostream& out);
// Throws std::logic_error when a check fails.
void cmd_verify(const RunConfig& cfg, std::ostream& out);
void cmd_energy(const RunConfig& cfg, std::ostream& out);
void cmd_accordion(const RunConfig& cfg, std::ostream& out);
void cmd_plot(const RunConfig& cfg, std::ostream& out);

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Fixed colors of the eight gradient labels, indexed by label.
extern const char* const kLabelColors[8];

struct SvgLayers {
  std::vector<ConvexCell> cells;
  std::vector<Polygon> untiled;
  std::vector<Polygon> outlines;  // drawn thin, e.g. covering squares
  SegmentSet sigma;
  SegmentSet boundary;
};
std::string render_svg(const SvgLayers& layers, const std::string& title);

}  // namespace vpyr
