#include "epd/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace epd {
namespace {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color;
  bool dashed = false;
};

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

void write_chart(const std::filesystem::path& path, const std::string& title,
                 const std::string& xlabel, const std::string& ylabel,
                 const std::vector<Series>& series, const std::vector<std::string>& notes) {
  constexpr double W = 900, H = 560, left = 100, right = 260, top = 50, bottom = 70;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
    for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) {
    const double pad = std::max(std::abs(ymin) * 1e-3, 1e-12);
    ymin -= pad;
    ymax += pad;
  }
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    out << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(px(xv))
        << "\" y2=\"" << top + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << top + ph + 20
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(py(yv)) << "\" x2=\"" << left
        << "\" y2=\"" << fixed(py(yv)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << fixed(py(yv) + 4)
        << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 20 << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
  out << "<text transform=\"translate(22," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";

  double ly = top + 10;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    const double lx = left + pw + 15;
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 25 << "\" y2=\"" << ly
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    out << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
        << "</text>\n";
    ly += 18;
  }
  ly += 10;
  for (const auto& note : notes) {
    out << "<text x=\"" << left + pw + 15 << "\" y=\"" << ly << "\" font-size=\"11\">"
        << escape(note) << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
}

}  // namespace

PlotReport emit_plots(const std::vector<std::filesystem::path>& ledgers,
                      const std::filesystem::path& out_dir) {
  if (ledgers.empty()) throw std::invalid_argument("plot: no ledgers given");
  std::filesystem::create_directories(out_dir);

  PlotReport report;
  std::vector<Series> energy, reaction;
  std::vector<std::string> energy_notes, reaction_notes;
  for (std::size_t k = 0; k < ledgers.size(); ++k) {
    const auto rows = read_ledger(ledgers[k]);
    if (rows.empty()) throw std::invalid_argument("plot: empty ledger " + ledgers[k].string());
    const std::string label = ledgers[k].stem().string();
    const std::string color = kPalette[k % kPalette.size()];
    const double e0 = initial_energy_of(rows.front());

    Series lhs{label + ": stored + dissipated", {0.0}, {e0}, color, false};
    Series rhs{label + ": E0 + external work", {0.0}, {e0}, color, true};
    Series force{label, {0.0}, {0.0}, color, false};
    for (const auto& r : rows) {
      const double t_ks = r.time_s / 1e3;
      lhs.x.push_back(t_ks);
      lhs.y.push_back(r.stored_energy_J + r.plastic_diss_cum_J + r.damage_diss_cum_J);
      rhs.x.push_back(t_ks);
      rhs.y.push_back(e0 + r.external_work_cum_J);
      force.x.push_back(t_ks);
      force.y.push_back(r.reaction_force_Pa / 1e6);
    }
    force.x.erase(force.x.begin());
    force.y.erase(force.y.begin());
    energy.push_back(std::move(lhs));
    energy.push_back(std::move(rhs));
    reaction.push_back(std::move(force));

    LedgerSummary summary;
    summary.label = label;
    summary.terminal_balance_residual_J = rows.back().balance_residual_J;
    if (const auto idx = rupture_index(rows)) {
      summary.rupture_step = rows[*idx].step;
      summary.rupture_time_s = rows[*idx].time_s;
    }
    energy_notes.push_back(label + ": final gap " + tick_label(summary.terminal_balance_residual_J) +
                           " J");
    reaction_notes.push_back(label + ": rupture " +
                             (summary.rupture_time_s ? tick_label(*summary.rupture_time_s / 1e3) + " ks"
                                                     : std::string("none")));
    report.ledgers.push_back(std::move(summary));
  }

  report.residual_decreasing = report.ledgers.size() > 1;
  for (std::size_t k = 1; k < report.ledgers.size(); ++k) {
    if (!(std::abs(report.ledgers[k].terminal_balance_residual_J) <
          std::abs(report.ledgers[k - 1].terminal_balance_residual_J))) {
      report.residual_decreasing = false;
    }
  }
  if (report.ledgers.size() > 1) {
    energy_notes.push_back(report.residual_decreasing ? "|gap| decreasing in listed order"
                                                      : "|gap| not monotone in listed order");
  }

  report.energy_svg = out_dir / "energy_balance.svg";
  report.reaction_svg = out_dir / "reaction_force.svg";
  write_chart(report.energy_svg, "Energy balance", "time [ks]", "energy [J per m thickness]",
              energy, energy_notes);
  write_chart(report.reaction_svg, "Reaction force (fault-stripe mean |dev sigma|)", "time [ks]",
              "reaction force [MPa]", reaction, reaction_notes);
  return report;
}

}  // namespace epd
