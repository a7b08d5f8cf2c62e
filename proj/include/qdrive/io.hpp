#pragma once

// CSV emission and parsing. Numbers are printed with 12 significant digits
// and '.' as decimal separator, independent of the global locale.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qdrive/analysis.hpp"
#include "qdrive/engine.hpp"
#include "qdrive/errors.hpp"
#include "qdrive/observables.hpp"
#include "qdrive/protocols.hpp"

namespace qdrive::io {

inline std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw InvalidArgument("csv: no column named '" + name + "'");
  }

  std::vector<double> numeric_column(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::stod(r.at(c)));
    return out;
  }
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InvalidArgument("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (first) throw InvalidArgument("csv: missing header");
  return t;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

/// Write via a temporary sibling file and rename it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { row_strings(header); }

  CsvWriter& row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw InvalidArgument("csv: row width does not match header");
    row_strings(cells);
    return *this;
  }

  const std::string& str() const { return out_; }

 private:
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }

  std::size_t width_;
  std::string out_;
};

/// tau,t,gamma,omega,re_c0,im_c0,re_c1,im_c1,fidelity,p_diab
inline std::string trajectory_csv(const Trajectory& traj, const ControlSchedule& schedule) {
  const auto fid = fidelity_series(traj, schedule);
  const auto pd = diabatic_probability_series(traj);
  CsvWriter w({"tau", "t", "gamma", "omega", "re_c0", "im_c0", "re_c1", "im_c1", "fidelity", "p_diab"});
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    w.row({number(s.tau), number(s.tau * traj.duration), number(s.control.gamma), number(s.control.omega),
           number(s.state.c0.real()), number(s.state.c0.imag()), number(s.state.c1.real()), number(s.state.c1.imag()),
           number(fid.values[i]), number(pd.values[i])});
  }
  return w.str();
}

/// tau,value,kind
inline std::string series_csv(const ObservableSeries& series) {
  CsvWriter w({"tau", "value", "kind"});
  for (std::size_t i = 0; i < series.taus.size(); ++i) {
    w.row({number(series.taus[i]), number(series.values[i]), to_string(series.kind)});
  }
  return w.str();
}

/// tau,gamma,omega,marker: sampled waveform rows, then one row per kick with
/// its area in the gamma column.
inline std::string waveform_csv(const ControlSchedule& schedule, int points = 1001) {
  CsvWriter w({"tau", "gamma", "omega", "marker"});
  for (int i = 0; i < points; ++i) {
    const double tau = static_cast<double>(i) / (points - 1);
    w.row({number(tau), number(schedule.gamma(tau)), number(schedule.omega(tau)), "sample"});
  }
  for (const Kick& k : schedule.kicks) w.row({number(k.tau), number(k.area), "", "kick"});
  return w.str();
}

/// parameter,duration,final_fidelity
inline std::string scan_csv(const std::vector<ScanRecord>& records) {
  CsvWriter w({"parameter", "duration", "final_fidelity"});
  for (const auto& r : records) w.row({number(r.value), number(r.duration), number(r.final_fidelity)});
  return w.str();
}

/// axis,axis_value,min_duration,protocol
inline std::string resource_csv(const std::vector<ResourcePoint>& points, CouplingAxis axis) {
  CsvWriter w({"axis", "axis_value", "min_duration", "protocol"});
  for (const auto& p : points) {
    w.row({to_string(axis), number(p.coupling_axis_value), number(p.min_duration), p.protocol_label});
  }
  return w.str();
}

}  // namespace qdrive::io
