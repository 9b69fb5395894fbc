#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace maxstable {

inline constexpr int kMaxDim = 3;

// Integer point of Z^d (d <= kMaxDim). Unused trailing coordinates are 0.
struct Site {
  std::array<int, kMaxDim> x{};
  int dim = 1;

  Site() = default;
  Site(std::initializer_list<int> coords);
  static Site zero(int dim);
  static Site axis(int dim, int axis, int length);

  int operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return x[static_cast<std::size_t>(i)]; }

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;
  bool operator==(const Site& o) const = default;
  auto operator<=>(const Site& o) const = default;

  // |h| = max_i |h_i|, the lattice norm used for distances.
  int sup_norm() const;
  double euclidean_norm() const;
  std::string to_string() const;
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept;
};

// Enumerates all sites h with |h| = r (sup norm), in lexicographic order.
std::vector<Site> sup_sphere(int dim, int r);
// Number of sites with |h| = r in Z^dim.
std::int64_t sup_sphere_count(int dim, int r);

// d(S1, S2) = min |s2 - s1|.
int set_distance(std::span<const Site> a, std::span<const Site> b);

// Finite ordered subset of Z^d.
class LatticeWindow {
 public:
  // Box with lower corner `lower` and `extent[i]` sites along axis i.
  // Sites are ordered with the first axis varying slowest.
  static LatticeWindow box(const Site& lower, std::span<const int> extent);
  // n x ... x n cube with lower corner at the origin.
  static LatticeWindow cube(int dim, int n);
  // n x ... x n cube roughly centered on the origin.
  static LatticeWindow centered_cube(int dim, int n);
  // Arbitrary site list; duplicates are rejected.
  static LatticeWindow from_sites(int dim, std::vector<Site> sites);

  int dim() const { return dim_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const Site& site(std::size_t i) const { return sites_[i]; }
  const std::vector<Site>& sites() const { return sites_; }
  const std::string& descriptor() const { return descriptor_; }

  bool is_box() const { return is_box_; }
  const Site& lower() const { return lower_; }
  const Site& upper() const { return upper_; }  // inclusive bounding-box corner

  std::optional<std::size_t> index_of(const Site& s) const;
  bool contains(const Site& s) const { return index_of(s).has_value(); }

  // Sites with a sup-distance-1 neighbour outside the window.
  std::size_t boundary_count() const;
  double boundary_ratio() const {
    return empty() ? 0.0 : static_cast<double>(boundary_count()) / static_cast<double>(size());
  }

  // Smallest box containing every t and t + h for t in this box.
  LatticeWindow inflated_by_lag(const Site& h) const;

 private:
  int dim_ = 1;
  std::vector<Site> sites_;
  std::string descriptor_;
  bool is_box_ = false;
  Site lower_;
  Site upper_;
  std::array<std::int64_t, kMaxDim> stride_{};
  std::unordered_map<Site, std::size_t, SiteHash> lookup_;
};

}  // namespace maxstable
