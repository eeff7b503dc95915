#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <set>

#include "cli.hpp"
#include "noisywalk/errors.hpp"
#include "noisywalk/io.hpp"

namespace noisywalk::cli {

using nlohmann::json;

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw OutputError("error while writing '" + path.string() + "'");
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw OutputError("cannot create output directory '" + dir.string() + "'");
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

bool is_closed_form(const std::string& method) {
  return method.size() > 12 && method.compare(method.size() - 12, 12, "_closed_form") == 0;
}

void sort_series(Series& s) {
  std::vector<std::size_t> idx(s.x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
  Series sorted{s.label, {}, {}, s.dashed};
  for (std::size_t i : idx) {
    sorted.x.push_back(s.x[i]);
    sorted.y.push_back(s.y[i]);
  }
  s = std::move(sorted);
}

}  // namespace

std::vector<Series> plot_series(const Report& report, std::string& x_label, std::string& y_label) {
  std::map<std::string, Series> by_key;
  std::vector<std::string> order;
  auto push = [&](const std::string& key, double x, double y, bool dashed) {
    auto [it, inserted] = by_key.try_emplace(key, Series{key, {}, {}, dashed});
    if (inserted) order.push_back(key);
    it->second.x.push_back(x);
    it->second.y.push_back(y);
  };

  std::set<double> rhos;
  std::map<std::string, std::set<int>> ns_by_method;
  for (const Record& r : report.records) {
    if (!std::isnan(r.estimate.rho)) rhos.insert(r.estimate.rho);
    ns_by_method[r.estimate.method].insert(r.estimate.n);
  }

  if (report.command == Subcommand::sweep) {
    x_label = "rho";
    y_label = "h";
    for (const Record& r : report.records) {
      const std::string& m = r.estimate.method;
      if (m == "shannon_pointwise" || m == "entropy_increment")
        push("h estimate (" + m + ")", r.estimate.rho, r.estimate.value, false);
      else if (m == "h_closed_form")
        push("h closed form", r.estimate.rho, r.estimate.value, true);
    }
  } else if (rhos.size() >= 2) {
    x_label = "rho";
    y_label = report.command == Subcommand::tv ? "total variation" : "value";
    for (const Record& r : report.records) {
      if (std::isnan(r.estimate.rho)) continue;
      std::string key = r.estimate.method;
      if (ns_by_method[key].size() > 1) key += " n=" + std::to_string(r.estimate.n);
      push(key, r.estimate.rho, r.estimate.value, is_closed_form(r.estimate.method));
    }
  } else {
    x_label = "n";
    y_label = report.command == Subcommand::tv ? "total variation" : "value";
    for (const Record& r : report.records)
      push(r.estimate.method, r.estimate.n, r.estimate.value, is_closed_form(r.estimate.method));
  }

  std::vector<Series> out;
  for (const std::string& key : order) {
    Series s = by_key.at(key);
    sort_series(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_svg(std::span<const Series> series, std::string_view title,
                       std::string_view x_label, std::string_view y_label) {
  constexpr double width = 760, height = 440, left = 70, right = 220, top = 40, bottom = 56;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * plot_h; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
       num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(left) + "\" y=\"24\" font-size=\"15\">" + escape(title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot_w) +
       "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    s += "<line x1=\"" + num(sx(xv)) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" + num(sx(xv)) +
         "\" y2=\"" + num(top + plot_h + 5) + "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(top + plot_h + 19) +
         "\" text-anchor=\"middle\">" + tick(xv) + "</text>\n";
    s += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(sy(yv)) + "\" x2=\"" + num(left) +
         "\" y2=\"" + num(sy(yv)) + "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" +
         tick(yv) + "</text>\n";
  }
  s += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(height - 12) +
       "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  s += "<text transform=\"translate(18 " + num(top + plot_h / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& ser = series[k];
    const std::string color = palette[k % std::size(palette)];
    const std::string dash = ser.dashed ? " stroke-dasharray=\"6 4\"" : "";
    std::string points;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += num(sx(ser.x[i])) + "," + num(sy(ser.y[i]));
    }
    s += "<polyline class=\"series\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\"" +
         dash + " points=\"" + points + "\"/>\n";
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      s += "<circle cx=\"" + num(sx(ser.x[i])) + "\" cy=\"" + num(sy(ser.y[i])) +
           "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + num(left + plot_w + 14) + "\" y1=\"" + num(ly) + "\" x2=\"" +
         num(left + plot_w + 40) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"1.8\"" + dash + "/>\n";
    s += "<text x=\"" + num(left + plot_w + 46) + "\" y=\"" + num(ly + 4) + "\">" +
         escape(ser.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void write_report(const Report& report, const std::filesystem::path& dir, bool plot) {
  if (report.records.empty()) throw InputError("write_report: empty result set");
  prepare_dir(dir);

  const auto results_path = dir / "results.json";
  std::ofstream results = open_output(results_path);
  for (const Record& r : report.records) {
    json j = to_json(r.estimate);
    if (!r.detail.is_null()) j["detail"] = r.detail;
    results << j.dump() << '\n';
  }
  finish(results, results_path);

  const auto table_path = dir / "table.csv";
  std::ofstream table = open_output(table_path);
  std::vector<EstimateResult> rows;
  rows.reserve(report.records.size());
  for (const Record& r : report.records) rows.push_back(r.estimate);
  write_csv(table, rows);
  finish(table, table_path);

  if (plot) {
    std::string x_label, y_label;
    const auto series = plot_series(report, x_label, y_label);
    const auto plot_path = dir / "plot.svg";
    std::ofstream svg = open_output(plot_path);
    svg << render_svg(series, to_string(report.command), x_label, y_label);
    finish(svg, plot_path);
  }
}

void write_metadata(const RunConfig& config, const std::filesystem::path& dir,
                    std::span<const std::string> argv) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  const json meta = {{"created", stamp},
                     {"tool", "noisywalk-cli"},
                     {"version", kToolVersion},
                     {"argv", std::vector<std::string>(argv.begin(), argv.end())},
                     {"config", config.resolved}};
  const auto path = dir / "metadata.json";
  std::ofstream out = open_output(path);
  out << meta.dump(2) << '\n';
  finish(out, path);
}

}  // namespace noisywalk::cli
