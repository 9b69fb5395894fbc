#include "maxstable/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "maxstable/errors.hpp"

namespace maxstable {

Site::Site(std::initializer_list<int> coords) {
  if (coords.size() == 0 || coords.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ContractError("Site: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  dim = static_cast<int>(coords.size());
  std::copy(coords.begin(), coords.end(), x.begin());
}

Site Site::zero(int dim) {
  Site s;
  s.dim = dim;
  return s;
}

Site Site::axis(int dim, int axis, int length) {
  Site s = zero(dim);
  s[axis] = length;
  return s;
}

Site Site::operator+(const Site& o) const {
  Site r = *this;
  for (int i = 0; i < dim; ++i) r[i] += o[i];
  return r;
}

Site Site::operator-(const Site& o) const {
  Site r = *this;
  for (int i = 0; i < dim; ++i) r[i] -= o[i];
  return r;
}

Site Site::operator-() const {
  Site r = *this;
  for (int i = 0; i < dim; ++i) r[i] = -r[i];
  return r;
}

int Site::sup_norm() const {
  int m = 0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(x[static_cast<std::size_t>(i)]));
  return m;
}

double Site::euclidean_norm() const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += static_cast<double>(x[i]) * x[i];
  return std::sqrt(s);
}

std::string Site::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << x[i];
  os << ')';
  return os.str();
}

std::size_t SiteHash::operator()(const Site& s) const noexcept {
  std::size_t h = static_cast<std::size_t>(s.dim);
  for (int i = 0; i < kMaxDim; ++i) {
    h = h * 0x100000001b3ULL ^ static_cast<std::size_t>(static_cast<std::uint32_t>(s.x[i]));
  }
  return h;
}

std::vector<Site> sup_sphere(int dim, int r) {
  std::vector<Site> out;
  if (r == 0) {
    out.push_back(Site::zero(dim));
    return out;
  }
  Site cur = Site::zero(dim);
  for (int i = 0; i < dim; ++i) cur[i] = -r;
  for (;;) {
    if (cur.sup_norm() == r) out.push_back(cur);
    int i = dim - 1;
    while (i >= 0 && cur[i] == r) {
      cur[i] = -r;
      --i;
    }
    if (i < 0) break;
    ++cur[i];
  }
  return out;
}

std::int64_t sup_sphere_count(int dim, int r) {
  if (r == 0) return 1;
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < dim; ++i) {
    outer *= 2 * r + 1;
    inner *= 2 * r - 1;
  }
  return outer - inner;
}

int set_distance(std::span<const Site> a, std::span<const Site> b) {
  int best = -1;
  for (const auto& s : a) {
    for (const auto& t : b) {
      const int d = (t - s).sup_norm();
      if (best < 0 || d < best) best = d;
    }
  }
  return best;
}

LatticeWindow LatticeWindow::box(const Site& lower, std::span<const int> extent) {
  const int dim = lower.dim;
  if (static_cast<int>(extent.size()) != dim) throw ConfigError("box window: extent/dimension mismatch");
  LatticeWindow w;
  w.dim_ = dim;
  w.is_box_ = true;
  w.lower_ = lower;
  w.upper_ = lower;
  std::int64_t total = 1;
  for (int i = 0; i < dim; ++i) {
    if (extent[static_cast<std::size_t>(i)] <= 0) throw ConfigError("box window: extents must be positive");
    w.upper_[i] = lower[i] + extent[static_cast<std::size_t>(i)] - 1;
    total *= extent[static_cast<std::size_t>(i)];
  }
  std::int64_t stride = 1;
  for (int i = dim - 1; i >= 0; --i) {
    w.stride_[static_cast<std::size_t>(i)] = stride;
    stride *= extent[static_cast<std::size_t>(i)];
  }
  w.sites_.reserve(static_cast<std::size_t>(total));
  Site cur = lower;
  for (std::int64_t k = 0; k < total; ++k) {
    w.sites_.push_back(cur);
    int i = dim - 1;
    while (i >= 0 && cur[i] == w.upper_[i]) {
      cur[i] = lower[i];
      --i;
    }
    if (i >= 0) ++cur[i];
  }
  std::ostringstream os;
  os << "box:lower=" << lower.to_string() << ":extent=(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << extent[static_cast<std::size_t>(i)];
  os << ')';
  w.descriptor_ = os.str();
  return w;
}

LatticeWindow LatticeWindow::cube(int dim, int n) {
  std::vector<int> ext(static_cast<std::size_t>(dim), n);
  return box(Site::zero(dim), ext);
}

LatticeWindow LatticeWindow::centered_cube(int dim, int n) {
  Site lo = Site::zero(dim);
  for (int i = 0; i < dim; ++i) lo[i] = -((n - 1) / 2);
  std::vector<int> ext(static_cast<std::size_t>(dim), n);
  return box(lo, ext);
}

LatticeWindow LatticeWindow::from_sites(int dim, std::vector<Site> sites) {
  LatticeWindow w;
  w.dim_ = dim;
  w.lower_ = Site::zero(dim);
  w.upper_ = Site::zero(dim);
  std::ostringstream os;
  os << "sites:";
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].dim != dim) throw ContractError("window: site dimension mismatch");
    if (!w.lookup_.emplace(sites[i], i).second) {
      throw ContractError("window: duplicate site " + sites[i].to_string());
    }
    for (int k = 0; k < dim; ++k) {
      w.lower_[k] = i == 0 ? sites[i][k] : std::min(w.lower_[k], sites[i][k]);
      w.upper_[k] = i == 0 ? sites[i][k] : std::max(w.upper_[k], sites[i][k]);
    }
    os << sites[i].to_string();
  }
  w.sites_ = std::move(sites);
  w.descriptor_ = os.str();
  return w;
}

std::optional<std::size_t> LatticeWindow::index_of(const Site& s) const {
  if (s.dim != dim_) return std::nullopt;
  if (is_box_) {
    std::int64_t idx = 0;
    for (int i = 0; i < dim_; ++i) {
      if (s[i] < lower_[i] || s[i] > upper_[i]) return std::nullopt;
      idx += static_cast<std::int64_t>(s[i] - lower_[i]) * stride_[static_cast<std::size_t>(i)];
    }
    return static_cast<std::size_t>(idx);
  }
  auto it = lookup_.find(s);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t LatticeWindow::boundary_count() const {
  const auto nbrs = sup_sphere(dim_, 1);
  std::size_t count = 0;
  for (const auto& s : sites_) {
    for (const auto& e : nbrs) {
      if (!contains(s + e)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

LatticeWindow LatticeWindow::inflated_by_lag(const Site& h) const {
  if (!is_box_) throw ContractError("inflated_by_lag requires a box window");
  Site lo = lower_;
  std::vector<int> ext(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    lo[i] = std::min(lower_[i], lower_[i] + h[i]);
    const int hi = std::max(upper_[i], upper_[i] + h[i]);
    ext[static_cast<std::size_t>(i)] = hi - lo[i] + 1;
  }
  return box(lo, ext);
}

}  // namespace maxstable
