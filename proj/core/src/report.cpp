#include "vsp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vsp/io.hpp"

namespace vsp {

std::vector<std::string> state_variable_names(const std::string& env_name, std::size_t state_dim) {
  if ((env_name == "MountainCarContinuous" || env_name == "MountainCar") && state_dim == 2) return {"x", "v"};
  if (env_name == "SimpleGoal" && state_dim == 2) return {"x", "y"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < state_dim; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

std::vector<std::string> action_variable_names(const std::string& env_name, std::size_t action_dim) {
  if (action_dim == 1) return {"F"};
  if (env_name == "SimpleGoal" && action_dim == 2) return {"dx", "dy"};
  std::vector<std::string> out;
  for (std::size_t k = 0; k < action_dim; ++k) out.push_back("a" + std::to_string(k));
  return out;
}

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

bool rounds_to_zero(double v) { return fixed3(std::fabs(v)) == "0.000"; }

}  // namespace

std::string format_equation(const std::string& lhs, const std::vector<double>& weights, double bias,
                            const std::vector<std::string>& variables) {
  std::string out = lhs + " = ";
  bool first = true;
  const auto term = [&](double coef, const std::string& suffix) {
    if (first) {
      out += (coef < 0.0 ? "-" : "");
    } else {
      out += (coef < 0.0 ? " - " : " + ");
    }
    out += fixed3(std::fabs(coef)) + suffix;
    first = false;
  };
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (!rounds_to_zero(weights[i])) term(weights[i], "·" + variables.at(i));
  if (first || !rounds_to_zero(bias)) term(rounds_to_zero(bias) ? 0.0 : bias, "");
  return out;
}

std::string explain(const PartitionModel& model, const std::string& env_name) {
  const auto vars = state_variable_names(env_name, model.state_dim());
  const auto outs = action_variable_names(env_name, model.action_dim());
  std::ostringstream out;
  out << model.size() << (model.size() == 1 ? " region" : " regions");
  if (!env_name.empty()) out << " (" << env_name << ")";
  out << "\n\n";
  for (std::size_t r = 0; r < model.size(); ++r) {
    const auto& c = model.quantizer().codeword(r).point;
    const auto& p = model.subpolicies()[r];
    out << "region " << r << "  codeword [";
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? ", " : "") << fixed3(c[i]);
    out << "]";
    if (const auto& loss = model.region_losses()[r]) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "  loss %.3g", *loss);
      out << buf;
    }
    out << '\n';
    for (std::size_t k = 0; k < p.action_dim(); ++k) {
      std::vector<double> w(p.weights().data.begin() + static_cast<std::ptrdiff_t>(k * p.state_dim()),
                            p.weights().data.begin() + static_cast<std::ptrdiff_t>((k + 1) * p.state_dim()));
      out << "    " << format_equation(outs[k], w, p.biases()[k], vars) << "    clipped to ["
          << fixed3(p.action_low()[k]) << ", " << fixed3(p.action_high()[k]) << "]\n";
    }
  }
  return out.str();
}

// ------------------------------------------------------------------ diagram

namespace {

Vector slice_state(const Vector& fixed, const DiagramSpec& spec, double x, double y) {
  Vector s = fixed;
  s[spec.axes[0]] = x;
  s[spec.axes[1]] = y;
  return s;
}

// Bisects the segment a -> b (regions ra != rb) down to a boundary crossing.
BoundaryPoint refine(const PartitionModel& model, Vector a, Vector b, std::size_t ra, std::size_t rb) {
  for (int it = 0; it < 80; ++it) {
    Vector mid(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
    if (mid == a || mid == b) break;
    const std::size_t rm = model.route(mid);
    if (rm == ra) {
      a = std::move(mid);
    } else {
      b = std::move(mid);
      rb = rm;
    }
  }
  Vector mid(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
  return BoundaryPoint{std::move(mid), ra, rb};
}

}  // namespace

Diagram compute_diagram(const PartitionModel& model, const DiagramSpec& spec) {
  const std::size_t d = model.state_dim();
  if (spec.axes[0] >= d || spec.axes[1] >= d || spec.axes[0] == spec.axes[1])
    throw InvalidArgument("diagram axes must be two distinct state components");
  if (spec.resolution < 2) throw InvalidArgument("diagram resolution must be at least 2");
  if (!(spec.x_range[0] < spec.x_range[1]) || !(spec.y_range[0] < spec.y_range[1]))
    throw InvalidArgument("diagram ranges must be increasing");

  Vector fixed(d, 0.0);
  if (spec.fixed) {
    require_dim(*spec.fixed, d, "diagram fixed state");
    fixed = *spec.fixed;
  } else {
    for (const auto& c : model.quantizer().codewords())
      for (std::size_t i = 0; i < d; ++i) fixed[i] += c.point[i] / static_cast<double>(model.size());
  }

  Diagram out;
  out.spec = spec;
  out.spec.fixed = fixed;
  const std::size_t r = spec.resolution;
  const auto coord = [&](const std::array<double, 2>& range, std::size_t i) {
    return range[0] + (static_cast<double>(i) + 0.5) * (range[1] - range[0]) / static_cast<double>(r);
  };

  out.grid.reserve(r * r);
  for (std::size_t iy = 0; iy < r; ++iy) {
    for (std::size_t ix = 0; ix < r; ++ix) {
      const double x = coord(spec.x_range, ix);
      const double y = coord(spec.y_range, iy);
      const Vector s = slice_state(fixed, spec, x, y);
      const std::size_t region = model.route(s);
      out.grid.push_back(GridSample{x, y, region, model.subpolicies()[region].predict(s)});
    }
  }

  // Marching squares over the label raster: each edge whose two corner labels
  // differ carries one refined boundary point; points inside a square are
  // joined pairwise, or to their mean when three or more regions meet.
  const auto at = [&](std::size_t ix, std::size_t iy) -> const GridSample& { return out.grid[iy * r + ix]; };
  const auto edge_point = [&](const GridSample& p, const GridSample& q) {
    return refine(model, slice_state(fixed, spec, p.x, p.y), slice_state(fixed, spec, q.x, q.y), p.region,
                  q.region);
  };
  for (std::size_t iy = 0; iy + 1 < r; ++iy) {
    for (std::size_t ix = 0; ix + 1 < r; ++ix) {
      const GridSample* corners[4] = {&at(ix, iy), &at(ix + 1, iy), &at(ix + 1, iy + 1), &at(ix, iy + 1)};
      std::vector<BoundaryPoint> pts;
      for (int e = 0; e < 4; ++e) {
        const GridSample& p = *corners[e];
        const GridSample& q = *corners[(e + 1) % 4];
        if (p.region != q.region) pts.push_back(edge_point(p, q));
      }
      if (pts.size() == 2) {
        out.boundaries.push_back({pts[0], pts[1]});
      } else if (pts.size() > 2) {
        Vector center(d, 0.0);
        for (const auto& p : pts)
          for (std::size_t i = 0; i < d; ++i) center[i] += p.state[i] / static_cast<double>(pts.size());
        const std::size_t rc = model.route(center);
        for (const auto& p : pts) out.boundaries.push_back({p, BoundaryPoint{center, rc, rc}});
      }
    }
  }

  for (const auto& c : model.quantizer().codewords())
    out.codewords.push_back({c.point[spec.axes[0]], c.point[spec.axes[1]]});
  return out;
}

std::string diagram_svg(const Diagram& diagram, const std::vector<std::string>& axis_names) {
  constexpr double kSize = 600.0;
  constexpr double kPad = 40.0;
  const auto& spec = diagram.spec;
  const auto px = [&](double x) {
    return kPad + (x - spec.x_range[0]) / (spec.x_range[1] - spec.x_range[0]) * kSize;
  };
  const auto py = [&](double y) {
    return kPad + kSize - (y - spec.y_range[0]) / (spec.y_range[1] - spec.y_range[0]) * kSize;
  };
  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  const double full = kSize + 2 * kPad;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << full << "\" height=\"" << full
      << "\" viewBox=\"0 0 " << full << ' ' << full << "\">\n";
  svg << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  svg << "<g stroke=\"#1f4e79\" stroke-width=\"1.5\">\n";
  const std::size_t a0 = spec.axes[0];
  const std::size_t a1 = spec.axes[1];
  for (const auto& seg : diagram.boundaries) {
    svg << "<line x1=\"" << num(px(seg.from.state[a0])) << "\" y1=\"" << num(py(seg.from.state[a1]))
        << "\" x2=\"" << num(px(seg.to.state[a0])) << "\" y2=\"" << num(py(seg.to.state[a1])) << "\"/>\n";
  }
  svg << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < diagram.codewords.size(); ++i) {
    const auto& c = diagram.codewords[i];
    svg << "<circle cx=\"" << num(px(c[0])) << "\" cy=\"" << num(py(c[1])) << "\" r=\"3\" fill=\"#c00000\"/>"
        << "<text x=\"" << num(px(c[0]) + 5) << "\" y=\"" << num(py(c[1]) - 5) << "\">" << i << "</text>\n";
  }
  const std::string xname = axis_names.size() > 0 ? axis_names[0] : "s" + std::to_string(a0);
  const std::string yname = axis_names.size() > 1 ? axis_names[1] : "s" + std::to_string(a1);
  svg << "<text x=\"" << kPad + kSize / 2 << "\" y=\"" << full - 10 << "\" text-anchor=\"middle\">" << xname
      << " [" << num(spec.x_range[0]) << ", " << num(spec.x_range[1]) << "]</text>\n";
  svg << "<text x=\"12\" y=\"" << kPad + kSize / 2 << "\" transform=\"rotate(-90 12 " << kPad + kSize / 2
      << ")\" text-anchor=\"middle\">" << yname << " [" << num(spec.y_range[0]) << ", " << num(spec.y_range[1])
      << "]</text>\n";
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string diagram_grid_csv(const Diagram& diagram) {
  std::ostringstream out;
  out << "x,y,region";
  const std::size_t ad = diagram.grid.empty() ? 0 : diagram.grid.front().action.size();
  for (std::size_t k = 0; k < ad; ++k) out << ",a" << k;
  out << '\n';
  for (const auto& g : diagram.grid) {
    out << format_real(g.x) << ',' << format_real(g.y) << ',' << g.region;
    for (const double a : g.action) out << ',' << format_real(a);
    out << '\n';
  }
  return out.str();
}

}  // namespace vsp
