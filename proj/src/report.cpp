#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "exmerge/error.hpp"
#include "exmerge/harness.hpp"

namespace exm {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

void write_trajectories(std::ostream& os, const ExperimentResult& r) {
  os << "replicate,n,rate,raw,normalized";
  for (const auto& c : r.extra_columns) os << ',' << c;
  for (const auto& c : r.bound_columns) os << ',' << c;
  os << ",threshold\n";
  for (const auto& t : r.trajectories) {
    for (const auto& row : t.rows) {
      os << t.replicate << ',' << row.n << ',' << format_number(row.rate) << ',' << format_number(row.raw) << ','
         << format_number(row.normalized);
      for (double x : row.extra) os << ',' << format_number(x);
      for (double x : t.bounds) os << ',' << format_number(x);
      os << ',' << format_number(t.threshold) << '\n';
    }
  }
}

void write_summary(std::ostream& os, const ExperimentResult& r) {
  os << "replicate,window_max,threshold,covered,raw_n_min,raw_n_hi,merged\n";
  std::size_t covered = 0, merged = 0;
  for (const auto& t : r.trajectories) {
    const double wm = windowed_max(t, r.window_lo, r.window_hi);
    const bool c = wm <= t.threshold;
    const bool m = t.rows.back().raw <= 0.1 * t.rows.front().raw;
    covered += c;
    merged += m;
    os << t.replicate << ',' << format_number(wm) << ',' << format_number(t.threshold) << ',' << (c ? 1 : 0) << ','
       << format_number(t.rows.front().raw) << ',' << format_number(t.rows.back().raw) << ',' << (m ? 1 : 0) << '\n';
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, r.trajectories.size()));
  os << "all,,," << format_number(static_cast<double>(covered) / n) << ",,," << format_number(static_cast<double>(merged) / n)
     << '\n';
}

// Normalized trajectories against log n, with each replicate's threshold as a dashed line.
void write_plot(std::ostream& os, const ExperimentResult& r, const std::string& title) {
  const double W = 800, H = 500, left = 70, right = 20, top = 40, bottom = 50;
  double nmin = 1e300, nmax = 0, ymax = 0;
  for (const auto& t : r.trajectories) {
    ymax = std::max(ymax, t.threshold);
    for (const auto& row : t.rows) {
      nmin = std::min(nmin, static_cast<double>(row.n));
      nmax = std::max(nmax, static_cast<double>(row.n));
      ymax = std::max(ymax, row.normalized);
    }
  }
  if (r.trajectories.empty() || !(nmax > nmin)) {
    nmin = 1;
    nmax = 10;
  }
  if (!(ymax > 0)) ymax = 1;
  ymax *= 1.05;
  const auto px = [&](double n) { return left + (std::log(n) - std::log(nmin)) / (std::log(nmax) - std::log(nmin)) * (W - left - right); };
  const auto py = [&](double y) { return top + (1.0 - y / ymax) * (H - top - bottom); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" << title
     << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << W - right << "\" y2=\"" << py(0)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = ymax * k / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_number(std::round(y * 1000) / 1000) << "</text>\n";
  }
  for (double n = std::pow(10.0, std::ceil(std::log10(nmin))); n <= nmax; n *= 10) {
    os << "<text x=\"" << px(n) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_number(n) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">n (log scale)</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">rate x distance</text>\n";
  for (const auto& t : r.trajectories) {
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.35\" points=\"";
    for (const auto& row : t.rows) os << px(static_cast<double>(row.n)) << ',' << py(row.normalized) << ' ';
    os << "\"/>\n";
    os << "<line x1=\"" << px(static_cast<double>(r.window_lo)) << "\" y1=\"" << py(t.threshold) << "\" x2=\"" << px(nmax)
       << "\" y2=\"" << py(t.threshold) << "\" stroke=\"firebrick\" stroke-opacity=\"0.25\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace

std::vector<std::filesystem::path> emit_outputs(const ExperimentResult& r, const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output, ec);
  if (ec) throw Error("cannot create output directory " + cfg.output.string() + ": " + ec.message());
  const std::string stem = cfg.name + "_" + r.experiment;
  std::vector<std::filesystem::path> written;

  const auto csv = cfg.output / (stem + ".csv");
  {
    auto out = open_output(csv);
    write_trajectories(out, r);
    close_output(out, csv);
  }
  written.push_back(csv);

  if (!r.trajectories.empty()) {
    const auto summary = cfg.output / (stem + "_summary.csv");
    auto out = open_output(summary);
    write_summary(out, r);
    close_output(out, summary);
    written.push_back(summary);
  }

  const auto svg = cfg.output / (stem + ".svg");
  {
    auto out = open_output(svg);
    write_plot(out, r, stem);
    close_output(out, svg);
  }
  written.push_back(svg);
  return written;
}

}  // namespace exm
