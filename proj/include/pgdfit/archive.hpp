#pragma once

// Mode archive: a text header followed by little-endian float64 arrays.
//
//   pgdfit-modes 1
//   grid <points on axis 0> [<axis 1> <axis 2>]
//   axis <name> <points>            (one line per parameter axis)
//   field <name> <modes>            (one line per stored solution)
//   data float64-le
//
// Data order: grid coordinates per axis; per parameter axis its points then
// weights; per field the lift, then per mode its spatial vector followed by
// one factor per axis.

#include <bit>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pgdfit/errors.hpp"
#include "pgdfit/mesh.hpp"
#include "pgdfit/separated.hpp"

namespace pgdfit {

class ArchiveError : public Error {
public:
  using Error::Error;
};

struct NamedSolution {
  std::string name;
  SeparatedSolution solution;
};

struct ModeArchive {
  std::vector<std::vector<double>> grid_axes;
  std::vector<NamedSolution> fields;

  const SeparatedSolution& field(const std::string& name) const {
    for (const auto& f : fields)
      if (f.name == name) return f.solution;
    throw ArchiveError("archive has no field '" + name + "'");
  }
};

inline constexpr int archive_version = 1;

namespace detail {

inline void put_doubles(std::ostream& out, std::span<const double> v) {
  for (double x : v) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

inline std::vector<double> get_doubles(std::istream& in, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ArchiveError("archive truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t(bytes[b]) << (8 * b);
    x = std::bit_cast<double>(bits);
  }
  return v;
}

inline std::string header_line(std::istream& in, const char* expect) {
  std::string line;
  if (!std::getline(in, line)) throw ArchiveError(std::string("archive header ends before '") + expect + "'");
  return line;
}

}  // namespace detail

inline void write_archive(std::ostream& out, const ModeArchive& archive) {
  require(!archive.fields.empty(), "write_archive: no fields");
  const auto& axes = archive.fields.front().solution.axes();
  for (const auto& f : archive.fields) {
    require(f.name.find_first_of(" \n") == std::string::npos && !f.name.empty(), "field names must be single words");
    require(f.solution.axes().size() == axes.size(), "all fields must share the parameter axes");
  }
  out << "pgdfit-modes " << archive_version << "\ngrid";
  for (const auto& a : archive.grid_axes) out << ' ' << a.size();
  out << '\n';
  for (const auto& a : axes) out << "axis " << a.name() << ' ' << a.size() << '\n';
  for (const auto& f : archive.fields) out << "field " << f.name << ' ' << f.solution.size() << '\n';
  out << "data float64-le\n";
  for (const auto& a : archive.grid_axes) detail::put_doubles(out, a);
  for (const auto& a : axes) {
    detail::put_doubles(out, a.points());
    detail::put_doubles(out, a.weights());
  }
  for (const auto& f : archive.fields) {
    detail::put_doubles(out, f.solution.lift());
    for (const auto& m : f.solution.modes()) {
      detail::put_doubles(out, m.spatial);
      for (const auto& y : m.factors) detail::put_doubles(out, y);
    }
  }
  if (!out) throw ArchiveError("failed writing archive");
}

inline ModeArchive read_archive(std::istream& in) {
  std::istringstream magic(detail::header_line(in, "pgdfit-modes"));
  std::string word;
  int version = 0;
  if (!(magic >> word >> version) || word != "pgdfit-modes") throw ArchiveError("not a pgdfit mode archive");
  if (version != archive_version) throw ArchiveError("unsupported archive version " + std::to_string(version));

  std::vector<std::size_t> grid_sizes;
  std::vector<std::pair<std::string, std::size_t>> axis_specs;
  std::vector<std::pair<std::string, std::size_t>> field_specs;
  for (;;) {
    std::istringstream line(detail::header_line(in, "data"));
    line >> word;
    if (word == "grid") {
      std::size_t n;
      while (line >> n) grid_sizes.push_back(n);
    } else if (word == "axis" || word == "field") {
      std::string name;
      std::size_t n;
      if (!(line >> name >> n)) throw ArchiveError("malformed '" + word + "' line");
      (word == "axis" ? axis_specs : field_specs).emplace_back(name, n);
    } else if (word == "data") {
      line >> word;
      if (word != "float64-le") throw ArchiveError("unsupported data encoding " + word);
      break;
    } else {
      throw ArchiveError("unknown archive header entry '" + word + "'");
    }
  }
  if (grid_sizes.empty() || grid_sizes.size() > 3) throw ArchiveError("archive grid must have 1 to 3 axes");

  ModeArchive archive;
  std::size_t n_nodes = 1;
  for (std::size_t n : grid_sizes) {
    archive.grid_axes.push_back(detail::get_doubles(in, n));
    n_nodes *= n;
  }
  std::vector<ParameterAxis> axes;
  for (const auto& [name, n] : axis_specs) {
    auto points = detail::get_doubles(in, n);
    const auto weights = detail::get_doubles(in, n);
    axes.emplace_back(name, std::move(points));
    if (axes.back().weights() != weights) throw ArchiveError("axis " + name + " weights are inconsistent");
  }
  for (const auto& [name, n_modes] : field_specs) {
    SeparatedSolution s(axes, detail::get_doubles(in, n_nodes));
    for (std::size_t m = 0; m < n_modes; ++m) {
      Mode mode;
      mode.spatial = detail::get_doubles(in, n_nodes);
      for (const auto& a : axes) mode.factors.push_back(detail::get_doubles(in, a.size()));
      s.add_mode(std::move(mode));
    }
    archive.fields.push_back({name, std::move(s)});
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ArchiveError("trailing data after archive");
  return archive;
}

inline void save_archive(const std::string& path, const ModeArchive& archive) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArchiveError("cannot open " + path + " for writing");
  write_archive(out, archive);
}

inline ModeArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("cannot open " + path);
  return read_archive(in);
}

}  // namespace pgdfit
