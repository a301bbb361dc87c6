#include "qgx/surface_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "qgx/errors.hpp"

namespace qgx::bsde {

namespace {

constexpr char kMagic[4] = {'Q', 'G', 'X', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw InvalidArgument("read_surface_binary: truncated input");
  }
  return v;
}

}  // namespace

void write_surface_csv(const ValueSurface& s, std::ostream& os, const std::string& comment,
                       std::size_t time_stride) {
  if (time_stride == 0) throw InvalidArgument("write_surface_csv: time_stride must be positive");
  if (!comment.empty()) os << "# " << comment << '\n';
  os << "t,x,u,v\n";
  const auto& tg = s.tgrid();
  const auto& xg = s.xgrid();
  char buf[128];
  for (std::size_t i = 0; i <= tg.n_steps(); ++i) {
    if (i % time_stride != 0 && i != tg.n_steps()) continue;
    const double t = tg.node(i);
    for (std::size_t j = 0; j < xg.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.17g,%.17g\n", t, xg.node(j), s.u.at(i, j),
                    s.v.at(i, j));
      os << buf;
    }
  }
}

void write_surface_binary(const ValueSurface& s, std::ostream& os) {
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, s.tgrid().t0());
  put(os, s.tgrid().t_end());
  put(os, static_cast<std::uint64_t>(s.tgrid().n_steps()));
  put(os, s.xgrid().x_min());
  put(os, s.xgrid().x_max());
  put(os, static_cast<std::uint64_t>(s.xgrid().size()));
  for (double v : s.u.data()) put(os, v);
  for (double v : s.v.data()) put(os, v);
}

ValueSurface read_surface_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw InvalidArgument("read_surface_binary: bad magic");
  }
  if (get<std::uint32_t>(is) != kVersion) {
    throw InvalidArgument("read_surface_binary: unsupported version");
  }
  const double t0 = get<double>(is);
  const double T = get<double>(is);
  const auto n_steps = get<std::uint64_t>(is);
  const double x_min = get<double>(is);
  const double x_max = get<double>(is);
  const auto n_points = get<std::uint64_t>(is);
  const TimeGrid tg(t0, T, n_steps);
  const SpaceGrid xg(x_min, x_max, n_points);
  const std::size_t count = (n_steps + 1) * n_points;
  std::vector<double> u(count), v(count);
  for (auto& x : u) x = get<double>(is);
  for (auto& x : v) x = get<double>(is);
  ValueSurface s{GridField(tg, xg, std::move(u)), GridField(tg, xg, std::move(v)), {}};
  s.meta.scheme = "read";
  s.meta.sup_u = s.u.sup_norm();
  return s;
}

}  // namespace qgx::bsde
