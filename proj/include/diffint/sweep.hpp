#pragma once

// N_bar sweeps normalized to the coherent-state variance, with CSV and SVG
// output. Rows are ordered by scheme, then N_bar, independent of how the
// points were scheduled.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "diffint/config.hpp"
#include "diffint/decoherence.hpp"
#include "diffint/schemes.hpp"

namespace diffint {

struct SweepSpec {
  Config base{};
  double nbar_min = 1e6;
  double nbar_max = 1e11;
  int points = 25;
  std::vector<Scheme> schemes = {Scheme::cs, Scheme::ss, Scheme::ss_plus,
                                 Scheme::js, Scheme::js_plus, Scheme::js_plus_corrected};
  bool optimize_detuning = false;
  bool include_decoherence = false;
  bool include_bias_in_variance = true;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (!(nbar_min > 0.0) || !(nbar_max > nbar_min)) throw ConfigError("sweep: need 0 < nbar_min < nbar_max");
    if (points < 2) throw ConfigError("sweep: need at least 2 points");
    if (schemes.empty()) throw ConfigError("sweep: empty scheme list");
  }

  std::vector<double> grid() const {
    std::vector<double> g(points);
    const double lo = std::log10(nbar_min);
    const double hi = std::log10(nbar_max);
    for (int i = 0; i < points; ++i) g[i] = std::pow(10.0, lo + (hi - lo) * i / (points - 1));
    g.front() = nbar_min;
    g.back() = nbar_max;
    return g;
  }
};

/// Sweep of the named preset with its default range and scheme list.
inline SweepSpec preset_sweep(Preset p) {
  SweepSpec s;
  s.base = preset_config(p);
  if (p == Preset::realistic) {
    // gamma sqrt(N) must stay below 2N; the grid starts well above that.
    s.nbar_min = 1e8;
    s.optimize_detuning = true;
    s.include_decoherence = true;
  }
  return s;
}

struct SweepRow {
  Scheme scheme = Scheme::cs;
  double nbar = 0.0;
  double variance = 0.0;
  double cs_variance = 0.0;
  double ratio = 0.0;
  double db = 0.0;
  double delta = 0.0;  // 0 for the coherent scheme
  double chi = 0.0;
  bool assumptions_ok = true;
};

/// One (scheme, N_bar) point.
inline SweepRow sweep_point(const SweepSpec& spec, Scheme scheme, double nbar) {
  const Config& c = spec.base;
  const EnsembleConfig cfg = c.ensemble_at(nbar);
  const SchemeId id = c.scheme(scheme);

  SweepRow row;
  row.scheme = scheme;
  row.nbar = nbar;
  row.cs_variance = eval_cs(cfg).variance();

  if (scheme == Scheme::cs) {
    row.variance = row.cs_variance;
  } else {
    PhaseEstimate e;
    if (spec.optimize_detuning) {
      DetuningSearch search;
      search.include_decoherence = spec.include_decoherence;
      PhysicalParams p = c.physical;
      const auto opt = optimize_detuning(p, cfg, id, search);
      e = opt.estimate;
      row.delta = opt.detuning;
      row.chi = opt.chi;
    } else {
      row.delta = c.physical.detuning;
      row.chi = c.chi_used();
      e = evaluate(id, cfg, LightConfig{c.physical.photons, row.chi});
      if (spec.include_decoherence)
        e = corrected_variance(e, scheme,
                               DecoherenceParams{c.physical.photons, row.chi, c.physical.linewidth, row.delta}, cfg);
    }
    row.variance = e.variance();
    if (scheme == Scheme::js_plus && spec.include_bias_in_variance) {
      const double b = e.bias("theta-mismatch");
      row.variance += b * b;
    }
    row.assumptions_ok =
        check_assumptions(cfg, LightConfig{c.physical.photons, row.chi}, id, c.threshold).all_satisfied();
  }
  row.ratio = row.variance / row.cs_variance;
  row.db = 10.0 * std::log10(row.ratio);
  return row;
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<Scheme> schemes = spec.schemes;
  std::sort(schemes.begin(), schemes.end());
  schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());
  const std::vector<double> grid = spec.grid();

  const std::size_t total = schemes.size() * grid.size();
  std::vector<SweepRow> rows(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      try {
        rows[k] = sweep_point(spec, schemes[k / grid.size()], grid[k % grid.size()]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

inline constexpr const char* csv_header = "scheme,N_bar,variance,cs_variance,ratio,dB,delta,chi,assumptions_ok";

inline std::string format_csv(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw InvalidParameter("emit_csv: no rows");
  std::string out = csv_header;
  out += '\n';
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%d\n",
                  std::string(scheme_name(r.scheme)).c_str(), r.nbar, r.variance, r.cs_variance, r.ratio, r.db,
                  r.delta, r.chi, r.assumptions_ok ? 1 : 0);
    out += buf;
  }
  return out;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace detail

inline void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  detail::write_file(path, format_csv(rows));
}

/// Log-log polyline plot of ratio against N_bar, one polyline per scheme.
inline std::string format_svg(const std::vector<SweepRow>& rows) {
  std::vector<Scheme> schemes;
  for (const auto& r : rows)
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end()) schemes.push_back(r.scheme);
  for (Scheme s : schemes) {
    const auto n = std::count_if(rows.begin(), rows.end(), [&](const SweepRow& r) { return r.scheme == s; });
    if (n < 2) throw InvalidParameter("emit_svg: need at least two points per scheme");
  }

  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& r : rows) {
    x_lo = std::min(x_lo, std::log10(r.nbar));
    x_hi = std::max(x_hi, std::log10(r.nbar));
    y_lo = std::min(y_lo, std::log10(r.ratio));
    y_hi = std::max(y_hi, std::log10(r.ratio));
  }
  x_lo = std::floor(x_lo);
  x_hi = std::ceil(x_hi);
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi);
  if (x_hi == x_lo) x_hi += 1.0;
  if (y_hi == y_lo) y_hi += 1.0;

  constexpr double width = 800, height = 560, left = 80, right = 160, top = 30, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double lx) { return left + (lx - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double ly) { return top + (y_hi - ly) / (y_hi - y_lo) * plot_h; };

  static constexpr const char* palette[] = {"#000000", "#1f77b4", "#ff7f0e", "#2ca02c",
                                            "#d62728", "#9467bd", "#8c564b"};
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
    << "<g font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(x_lo); d <= static_cast<int>(x_hi); ++d) {
    const double x = px(d);
    s << "<line class=\"xtick\" x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x << "\" y2=\""
      << top + plot_h + 6 << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << x << "\" y=\"" << top + plot_h + 20 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(y_lo); d <= static_cast<int>(y_hi); ++d) {
    const double y = py(d);
    s << "<line class=\"ytick\" x1=\"" << left - 6 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << left - 10 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  s << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">N_bar</text>\n"
    << "<text x=\"20\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << top + plot_h / 2 << ")\">variance / coherent-state variance</text>\n";

  for (std::size_t k = 0; k < schemes.size(); ++k) {
    const char* colour = palette[static_cast<int>(schemes[k]) % 7];
    std::vector<SweepRow> pts;
    for (const auto& r : rows)
      if (r.scheme == schemes[k]) pts.push_back(r);
    std::sort(pts.begin(), pts.end(), [](const SweepRow& a, const SweepRow& b) { return a.nbar < b.nbar; });
    s << "<polyline data-scheme=\"" << scheme_name(schemes[k]) << "\" fill=\"none\" stroke=\"" << colour
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      s << (i ? " " : "") << px(std::log10(pts[i].nbar)) << ',' << py(std::log10(pts[i].ratio));
    s << "\"/>\n";
    const double ly = top + 20 + 20.0 * static_cast<double>(k);
    s << "<line x1=\"" << width - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 45 << "\" y2=\""
      << ly << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n"
      << "<text x=\"" << width - right + 52 << "\" y=\"" << ly + 4 << "\">" << scheme_name(schemes[k])
      << "</text>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

inline void emit_svg(const std::vector<SweepRow>& rows, const std::string& path) {
  detail::write_file(path, format_svg(rows));
}

}  // namespace diffint
