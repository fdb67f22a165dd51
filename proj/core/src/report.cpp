#include "tqff/report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Core>
#include <json.hpp>

#include "tqff/error.hpp"

namespace tqff {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "rename to " + path.string() + ": " + ec.message());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw Error(ErrorCode::LengthMismatch, "row has " + std::to_string(row.size()) + " fields, table has " +
                                               std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorCode::InvalidArgument, "no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(std::strtod(r[c].c_str(), nullptr));
  return out;
}

std::string CsvTable::render(const std::string& comment) const {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += '\n';
  }
  return out;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v, bool log) {
  std::ostringstream s;
  if (log) {
    s << "1e" << static_cast<int>(std::lround(v));
  } else {
    s.precision(3);
    s << v;
  }
  return s.str();
}

}  // namespace

std::string render_svg(const PlotSpec& plot) {
  constexpr double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto tx = [&](double v) { return plot.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.logy ? std::log10(v) : v; };
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      xmin = std::min(xmin, a), xmax = std::max(xmax, a);
      ymin = std::min(ymin, b), ymax = std::max(ymax, b);
    }
  }
  if (!(xmin < xmax)) xmin -= 0.5, xmax += 0.5;
  if (!(ymin < ymax)) ymin -= 0.5, ymax += 0.5;
  auto px = [&](double v) { return left + (tx(v) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - ymin) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 - right / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0, fy = ymin + (ymax - ymin) * t / 4.0;
    const double sx = left + pw * t / 4.0, sy = top + ph - ph * t / 4.0;
    o << "<text x=\"" << sx << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << tick_label(fx, plot.logx) << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">" << tick_label(fy, plot.logy)
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(plot.xlabel) << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(plot.ylabel) << "</text>\n";
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (plot.scatter) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!std::isfinite(tx(s.x[i])) || !std::isfinite(ty(s.y[i]))) continue;
        o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"1.5\" fill=\"" << color
          << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!std::isfinite(tx(s.x[i])) || !std::isfinite(ty(s.y[i]))) continue;
        o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
      o << "\"/>\n";
    }
    const double ly = top + 14 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right + 30 << "\" y2=\""
      << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - right + 35 << "\" y=\"" << ly << "\">" << xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

PlotSpec plot_from_table(const CsvTable& table, const std::string& x_col, const std::string& y_col,
                         const std::string& group_col,
                         const std::function<bool(const std::vector<std::string>&)>& filter) {
  PlotSpec plot;
  plot.xlabel = x_col;
  plot.ylabel = y_col;
  const std::size_t xc = table.column_index(x_col), yc = table.column_index(y_col);
  const bool grouped = !group_col.empty();
  const std::size_t gc = grouped ? table.column_index(group_col) : 0;
  std::map<std::string, std::size_t> index;
  for (const auto& r : table.rows) {
    if (filter && !filter(r)) continue;
    const std::string key = grouped ? r[gc] : y_col;
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, plot.series.size()).first;
      plot.series.push_back(Series{key, {}, {}});
    }
    plot.series[it->second].x.push_back(std::strtod(r[xc].c_str(), nullptr));
    plot.series[it->second].y.push_back(std::strtod(r[yc].c_str(), nullptr));
  }
  return plot;
}

std::string ReportBundle::seed_list() const {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "," : "") + std::to_string(seeds[i]);
  return s;
}

std::string ReportBundle::manifest_json() const {
  nlohmann::ordered_json m;
  m["experiment"] = experiment;
  m["config_hash"] = config_hash;
  m["seeds"] = seeds;
  m["status"] = failed ? "failed" : "ok";
  if (failed) m["failure"] = failure;
  if (failure_code) m["failure_code"] = to_string(*failure_code);
  m["tables"] = nlohmann::json::array();
  for (const auto& [name, _] : tables) m["tables"].push_back(name + ".csv");
  m["figures"] = nlohmann::json::array();
  for (const auto& [name, _] : figures) m["figures"].push_back(name + ".svg");
  for (const auto& [name, _] : plot_data) m["figures"].push_back(name + ".dat");
  m["config"] = config_json.empty() ? nlohmann::ordered_json::object() : nlohmann::ordered_json::parse(config_json);
  m["versions"] = {{"tqff", TQFF_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__}};
  return m.dump(2) + "\n";
}

std::string render_plot_data(const PlotSpec& plot) {
  std::string out = "# " + plot.title + "\n";
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const Series& s = plot.series[k];
    if (k > 0) out += "\n\n";
    out += "# " + s.label + "\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) out += format_double(s.x[i]) + " " + format_double(s.y[i]) + "\n";
  }
  return out;
}

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir) {
  const std::string comment = "config_hash=" + bundle.config_hash + " seeds=" + bundle.seed_list();
  for (const auto& [name, table] : bundle.tables) write_file_atomic(dir / (name + ".csv"), table.render(comment));
  for (const auto& [name, svg] : bundle.figures) write_file_atomic(dir / (name + ".svg"), svg);
  for (const auto& [name, dat] : bundle.plot_data) write_file_atomic(dir / (name + ".dat"), dat);
  write_file_atomic(dir / "manifest.json", bundle.manifest_json());
}

int thread_limit() {
  if (const char* env = std::getenv("TQFF_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(thread_limit()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tqff
