#include "vpyr/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vpyr/covering.hpp"
#include "vpyr/energy.hpp"
#include "vpyr/solution.hpp"

namespace vpyr {

namespace fs = std::filesystem;
using nlohmann::json;

const char* const kLabelColors[8] = {"#1f77b4", "#aec7e8", "#d62728", "#ff9896",
                                     "#2ca02c", "#98df8a", "#9467bd", "#c5b0d5"};

namespace {

std::string fmt(double v, int digits = 12) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_file(const RunConfig& cfg, const std::string& name, const std::string& text, std::ostream& out) {
  fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path p = dir / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw SpecError("cannot write " + p.string());
  f << text;
  if (!f) throw SpecError("cannot write " + p.string());
  out << "wrote " << p.string() << "\n";
}

void check_config(const RunConfig& cfg) {
  if (cfg.depths.empty()) throw SpecError("no depth given");
  for (int d : cfg.depths)
    if (d < 1) throw SpecError("depth must be at least 1");
  if (cfg.threads < 1) throw SpecError("threads must be at least 1");
  if (cfg.alphas.empty()) throw SpecError("no alpha given");
  for (double d : cfg.deltas)
    if (!(d >= 0)) throw SpecError("delta must be nonnegative");
  for (double h : cfg.hs)
    if (!(h >= 0)) throw SpecError("h must be nonnegative");
}

Covering load_covering(const RunConfig& cfg) {
  if (cfg.domain.empty()) throw SpecError("--domain is required");
  CompatibleDomain dom = assemble_compatible(load_domain_spec(cfg.domain));
  CoverOptions opt;
  opt.max_rect_squares = cfg.max_squares;
  opt.m_max = cfg.steps;
  opt.n_max = cfg.levels;
  return cover_domain(dom, opt);
}

AccordionSpec accordion_spec(const RunConfig& cfg) {
  if (cfg.frames < 1) throw SpecError("frames must be at least 1");
  const std::string& s = cfg.sequence;
  auto param = [&](std::size_t skip) {
    try {
      return std::stod(s.substr(skip));
    } catch (const std::exception&) {
      throw SpecError("bad sequence " + s);
    }
  };
  if (s == "harmonic") return harmonic_accordion(cfg.frames);
  if (s.rfind("shifted:", 0) == 0) return shifted_accordion(param(8), cfg.frames);
  if (s.rfind("geometric:", 0) == 0) return geometric_accordion(param(10), cfg.frames);
  throw SpecError("unknown sequence " + s + " (harmonic, shifted:<s>, geometric:<q>)");
}

std::string kind_name(Provenance::Kind k) {
  switch (k) {
    case Provenance::Rectangle: return "rectangle";
    case Provenance::Triangle: return "triangle";
    case Provenance::Vitali: return "vitali";
  }
  return "?";
}

}  // namespace

void cmd_cover(const RunConfig& cfg, std::ostream& out) {
  Covering cov = load_covering(cfg);
  out << cov.squares.size() << " squares, sum of sides " << fmt(cov.side_sum()) << "\n";
  std::map<std::pair<int, int>, std::map<int, int>> steps;
  for (const auto& q : cov.squares) ++steps[{q.tag.kind, q.tag.piece}][q.tag.step];
  for (const auto& [key, per] : steps) {
    out << kind_name(static_cast<Provenance::Kind>(key.first)) << " " << key.second << ", squares per step:";
    for (const auto& [s, n] : per) out << " " << s << ":" << n;
    out << "\n";
  }
  out << "residual area " << fmt(cov.residual_area) << (cov.truncated ? " (truncated)" : "") << "\n";
  write_file(cfg, "covering.json", write_covering(cov), out);
}

void cmd_build(const RunConfig& cfg, std::ostream& out) {
  check_config(cfg);
  Covering cov = load_covering(cfg);
  int depth = cfg.depths.front();
  Solution sol = build_solution(cov, depth);
  double untiled = 0.0;
  for (const auto& u : sol.map.untiled) untiled += std::abs(signed_area(u).value());
  out << sol.map.cells.size() << " cells in " << cov.squares.size() << " squares at depth " << depth << "\n";
  out << "untiled area " << fmt(untiled) << ", sigma length " << fmt(sol.sigma.length()) << "\n";
  write_file(cfg, "covering.json", write_covering(cov), out);
  write_file(cfg, "cells.txt", export_cells(sol.map), out);
}

void cmd_verify(const RunConfig& cfg, std::ostream& out) {
  check_config(cfg);
  Covering cov = load_covering(cfg);
  int depth = cfg.depths.front();
  Solution sol = build_solution(cov, depth);
  VerifyReport rep = verify_solution(sol, cfg.samples, cfg.deltas, cfg.seed, cfg.threads);
  json j;
  j["depth"] = depth;
  j["samples"] = rep.samples;
  j["samples_in_E"] = rep.samples_in_E;
  j["fd_max_error"] = rep.fd_max_error;
  j["bad_cells"] = rep.bad_cells;
  j["continuity_defect"] = rep.continuity.max_defect.value();
  j["continuity_exact"] = rep.continuity_exact;
  j["shared_edges"] = rep.continuity.shared_edges;
  j["overlaps"] = rep.continuity.overlaps;
  j["boundary_sup_ratio"] = rep.boundary_sup_ratio;
  j["trace_ratio"] = rep.trace_ratio;
  j["h1"] = json::array();
  for (const auto& c : rep.h1)
    j["h1"].push_back({{"delta", c.delta},
                       {"checked", c.checked},
                       {"connected", c.connected},
                       {"components", c.components},
                       {"sigma_length", c.sigma_length},
                       {"squares_meeting", c.squares_meeting}});
  j["ok"] = rep.ok();
  out << "gradient in E at " << rep.samples_in_E << " of " << rep.samples << " samples, " << rep.bad_cells.size()
      << " bad cells\n";
  out << "finite differences max error " << fmt(rep.fd_max_error, 3) << "\n";
  out << "continuity defect " << fmt(rep.continuity.max_defect.value(), 3)
      << (rep.continuity_exact ? " (exact)" : "") << " over " << rep.continuity.shared_edges << " shared edges\n";
  out << "boundary ratio " << fmt(rep.boundary_sup_ratio, 6) << ", trace ratio " << fmt(rep.trace_ratio, 6) << "\n";
  for (const auto& c : rep.h1) {
    out << "delta " << fmt(c.delta) << ": ";
    if (!c.checked) out << "not checked (domain not convex)\n";
    else
      out << (c.connected ? "connected" : "NOT connected") << ", " << c.squares_meeting << " squares meet, sigma length "
          << fmt(c.sigma_length, 8) << "\n";
  }
  write_file(cfg, "verify.json", j.dump(1) + "\n", out);
  if (!rep.ok()) throw std::logic_error("verification failed");
  out << "ok\n";
}

void cmd_energy(const RunConfig& cfg, std::ostream& out) {
  check_config(cfg);
  Covering cov = load_covering(cfg);
  std::vector<EnergyReport> rows;
  EnergyOptions opt;
  opt.threads = cfg.threads;
  opt.certify_tail = cfg.certify_tail;
  for (int depth : cfg.depths) {
    Solution sol = build_solution(cov, depth);
    for (double alpha : cfg.alphas) {
      auto r = energy_report(sol, alpha, cfg.deltas, cfg.hs, opt);
      rows.insert(rows.end(), r.begin(), r.end());
    }
  }
  std::string csv = energy_csv(rows);
  out << csv;
  write_file(cfg, "energy.json", energy_json(rows), out);
  write_file(cfg, "energy.csv", csv, out);
}

void cmd_accordion(const RunConfig& cfg, std::ostream& out) {
  AccordionSpec spec = accordion_spec(cfg);
  PiecewiseAffineMap map = build_accordion(spec);
  std::ostringstream axis;
  axis << "n,s_2n,u_even,s_2n+1,u_odd\n";
  for (int n = 1; n <= spec.frames; ++n)
    axis << n << "," << fmt(spec.s(2 * n)) << "," << fmt(accordion_axis_even(spec.s, n)) << ","
         << fmt(spec.s(2 * n + 1)) << "," << fmt(accordion_axis_odd(spec.s, n)) << "\n";
  double L = jump_length(map.cells);
  out << spec.frames << " frames, " << map.cells.size() << " cells, jump length " << fmt(L) << "\n";
  out << "axis at the last frame: even " << fmt(accordion_axis_even(spec.s, spec.frames)) << ", odd "
      << fmt(accordion_axis_odd(spec.s, spec.frames)) << "\n";
  write_file(cfg, "accordion_cells.txt", export_cells(map), out);
  write_file(cfg, "accordion_axis.csv", axis.str(), out);
}

void cmd_plot(const RunConfig& cfg, std::ostream& out) {
  check_config(cfg);
  if (cfg.domain.empty()) {
    PiecewiseAffineMap map = build_accordion(accordion_spec(cfg));
    SvgLayers L;
    L.cells = map.cells;
    L.untiled = map.untiled;
    std::vector<Segment> jumps;
    for (const auto& f : build_arrangement(map.cells, 1e-12).interfaces)
      if (!f.shared() || map.cells[f.pos].gradient != map.cells[f.neg].gradient) jumps.push_back({f.a.v(), f.b.v()});
    L.sigma = SegmentSet(std::move(jumps));
    write_file(cfg, "accordion.svg", render_svg(L, "accordion, " + std::to_string(cfg.frames) + " frames"), out);
    return;
  }
  Covering cov = load_covering(cfg);
  Solution sol = build_solution(cov, cfg.depths.front());
  SvgLayers C;
  for (const auto& q : cov.squares) C.outlines.push_back(q.polygon());
  C.boundary = sol.boundary;
  write_file(cfg, "covering.svg", render_svg(C, std::to_string(cov.squares.size()) + " squares"), out);
  SvgLayers S;
  S.cells = sol.map.cells;
  S.untiled = sol.map.untiled;
  S.sigma = sol.sigma;
  S.boundary = sol.boundary;
  write_file(cfg, "cells.svg", render_svg(S, "depth " + std::to_string(sol.depth)), out);
}

std::string render_svg(const SvgLayers& L, const std::string& title) {
  Box bb{INFINITY, INFINITY, -INFINITY, -INFINITY};
  auto grow = [&](Vec2 p) {
    bb.x0 = std::min(bb.x0, p.x);
    bb.y0 = std::min(bb.y0, p.y);
    bb.x1 = std::max(bb.x1, p.x);
    bb.y1 = std::max(bb.y1, p.y);
  };
  for (const auto& c : L.cells)
    for (const auto& v : c.vertices) grow(v.v());
  for (const auto* set : {&L.untiled, &L.outlines})
    for (const auto& p : *set)
      for (const auto& v : p) grow(v.v());
  for (const auto* s : {&L.sigma, &L.boundary})
    for (const auto& seg : s->segments()) {
      grow(seg.a);
      grow(seg.b);
    }
  if (!(bb.x0 <= bb.x1)) bb = {0, 0, 1, 1};
  double w = bb.x1 - bb.x0, h = bb.y1 - bb.y0, ext = std::max(w, h);
  const double px = 800.0 / ext, pad = 10.0, legend = 40.0;
  double W = w * px + 2 * pad, H = h * px + 2 * pad + legend;
  auto X = [&](double x) { return fmt((x - bb.x0) * px + pad, 9); };
  auto Y = [&](double y) { return fmt((bb.y1 - y) * px + pad, 9); };
  auto points = [&](const Polygon& p) {
    std::string s;
    for (const auto& v : p) s += X(v.x.value()) + "," + Y(v.y.value()) + " ";
    if (!s.empty()) s.pop_back();
    return s;
  };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W, 6) << "\" height=\"" << fmt(H, 6)
    << "\" viewBox=\"0 0 " << fmt(W, 6) << " " << fmt(H, 6) << "\">\n";
  o << "<title>" << title << "</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int k = 0; k < 8; ++k) {
    bool any = false;
    for (const auto& c : L.cells) {
      auto lab = SignedMatrix::from_matrix(c.gradient);
      if (!lab || lab->index() != k) continue;
      if (!any) o << "<g fill=\"" << kLabelColors[k] << "\">\n";
      any = true;
      o << "<polygon points=\"" << points(c.vertices) << "\"/>\n";
    }
    if (any) o << "</g>\n";
  }
  if (!L.untiled.empty()) {
    o << "<g fill=\"#dddddd\">\n";
    for (const auto& p : L.untiled) o << "<polygon points=\"" << points(p) << "\"/>\n";
    o << "</g>\n";
  }
  if (!L.outlines.empty()) {
    o << "<g fill=\"none\" stroke=\"#444444\" stroke-width=\"0.8\">\n";
    for (const auto& p : L.outlines) o << "<polygon points=\"" << points(p) << "\"/>\n";
    o << "</g>\n";
  }
  auto path = [&](const SegmentSet& s, const char* stroke, double width) {
    if (s.empty()) return;
    o << "<path fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\" d=\"";
    for (const auto& seg : s.segments())
      o << "M" << X(seg.a.x) << " " << Y(seg.a.y) << "L" << X(seg.b.x) << " " << Y(seg.b.y);
    o << "\"/>\n";
  };
  path(L.sigma, "#000000", 0.4);
  path(L.boundary, "#000000", 2.0);
  // legend
  const char* names[8] = {"+A1", "-A1", "+A2", "-A2", "+A3", "-A3", "+A4", "-A4"};
  double y0 = H - legend + 12;
  for (int k = 0; k < 8; ++k) {
    double x0 = pad + k * 60.0;
    o << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"14\" height=\"14\" fill=\"" << kLabelColors[k]
      << "\"/><text x=\"" << x0 + 18 << "\" y=\"" << y0 + 12 << "\" font-size=\"12\">" << names[k] << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "cover") cmd_cover(cfg, out);
    else if (cfg.command == "build") cmd_build(cfg, out);
    else if (cfg.command == "verify") cmd_verify(cfg, out);
    else if (cfg.command == "energy") cmd_energy(cfg, out);
    else if (cfg.command == "accordion") cmd_accordion(cfg, out);
    else if (cfg.command == "plot") cmd_plot(cfg, out);
    else throw SpecError("unknown command " + cfg.command);
    return kOk;
  } catch (const CompatibilityError& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::runtime_error& e) {
    std::string what = e.what();
    err << "error: " << what << "\n";
    return what == "insufficient depth" ? kPrecondition : kInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace vpyr
