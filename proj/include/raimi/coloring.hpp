#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace raimi {

enum class CarrierKind { Zn, ProductZnG, Sl2, Box };

// Finite index set a coloring is defined on. Indices are dense in
// [0, size()): residues for Zn, (x, g) mixed-radix for the product,
// the group enumeration order for SL2, and row-major tuples for Box.
struct Carrier {
  CarrierKind kind = CarrierKind::Zn;
  uint64_t n = 0;                // Zn: N;  Sl2: q;  Box: side M
  uint64_t box_k = 0;            // Box: tuple length
  std::vector<uint64_t> orders;  // ProductZnG: cyclic orders of the extra factor

  uint64_t extra_order() const {
    uint64_t m = 1;
    for (uint64_t o : orders) m *= o;
    return m;
  }

  uint64_t size() const {
    switch (kind) {
      case CarrierKind::Zn:
        return n;
      case CarrierKind::ProductZnG:
        return n * extra_order();
      case CarrierKind::Sl2:
        return n * n * n - n;
      case CarrierKind::Box: {
        uint64_t s = 1;
        for (uint64_t i = 0; i < box_k; ++i) s *= n;
        return s;
      }
    }
    return 0;
  }
};

enum class ColoringKind {
  random,
  intervals,
  residues,
  fourier_sparse,
  fiber_constant,
  adversarial_left_pack,
  from_file,
};

inline const char* coloring_kind_name(ColoringKind k) {
  switch (k) {
    case ColoringKind::random: return "random";
    case ColoringKind::intervals: return "intervals";
    case ColoringKind::residues: return "residues";
    case ColoringKind::fourier_sparse: return "fourier_sparse";
    case ColoringKind::fiber_constant: return "fiber_constant";
    case ColoringKind::adversarial_left_pack: return "adversarial_left_pack";
    case ColoringKind::from_file: return "file";
  }
  return "?";
}

inline ColoringKind coloring_kind_from_name(const std::string& s) {
  if (s == "random") return ColoringKind::random;
  if (s == "intervals") return ColoringKind::intervals;
  if (s == "residues") return ColoringKind::residues;
  if (s == "fourier_sparse") return ColoringKind::fourier_sparse;
  if (s == "fiber_constant") return ColoringKind::fiber_constant;
  if (s == "adversarial_left_pack") return ColoringKind::adversarial_left_pack;
  if (s == "file") return ColoringKind::from_file;
  throw PreconditionViolated("unknown coloring kind: " + s);
}

struct ColoringSpec {
  Carrier carrier;
  ColoringKind kind = ColoringKind::random;
  uint32_t t = 2;
  uint64_t seed = 0;
  std::vector<uint32_t> file_colors;  // from_file only
};

// Total coloring with values 1..t, evaluated procedurally so large carriers
// never materialize a table.
class Coloring {
 public:
  explicit Coloring(ColoringSpec spec) : spec_(std::move(spec)) {
    if (spec_.t == 0) throw PreconditionViolated("need at least one color");
    const Carrier& c = spec_.carrier;
    if (spec_.kind == ColoringKind::fiber_constant && c.kind != CarrierKind::ProductZnG)
      throw PreconditionViolated("fiber_constant needs a product carrier");
    if (spec_.kind == ColoringKind::from_file && spec_.file_colors.size() != c.size())
      throw PreconditionViolated("file coloring size mismatch");
    if (spec_.kind == ColoringKind::fourier_sparse) {
      uint64_t s = spec_.seed;
      for (int j = 0; j < 3; ++j) {
        freq_[j] = 1 + splitmix64(s) % std::max<uint64_t>(1, c.size() / 2);
        phase_[j] = static_cast<double>(splitmix64(s) >> 11) * 0x1p-53;
      }
    }
  }

  const ColoringSpec& spec() const { return spec_; }
  uint32_t t() const { return spec_.t; }
  uint64_t size() const { return spec_.carrier.size(); }

  uint32_t color(uint64_t idx) const {
    const Carrier& c = spec_.carrier;
    uint32_t t = spec_.t;
    switch (spec_.kind) {
      case ColoringKind::random:
        return 1 + static_cast<uint32_t>(hash_index(spec_.seed, idx) % t);
      case ColoringKind::residues:
        if (c.kind == CarrierKind::Box) {
          uint64_t rest = idx, digit_sum = 0;
          for (uint64_t i = 0; i < c.box_k; ++i) {
            digit_sum += rest % c.n + 1;
            rest /= c.n;
          }
          return 1 + static_cast<uint32_t>(digit_sum % t);
        }
        return 1 + static_cast<uint32_t>(idx % t);
      case ColoringKind::intervals: {
        unsigned __int128 pos = static_cast<unsigned __int128>(idx) * t;
        uint64_t bucket = static_cast<uint64_t>(pos / size());
        return 1 + static_cast<uint32_t>(std::min<uint64_t>(bucket, t - 1));
      }
      case ColoringKind::fourier_sparse: {
        double u = static_cast<double>(idx) / static_cast<double>(size());
        double s = 0;
        for (int j = 0; j < 3; ++j)
          s += std::cos(2.0 * std::numbers::pi * (static_cast<double>(freq_[j]) * u + phase_[j]));
        double lin = (s + 3.0) / 6.0;
        auto bucket = static_cast<int64_t>(lin * t);
        if (bucket < 0) bucket = 0;
        if (bucket >= static_cast<int64_t>(t)) bucket = t - 1;
        return 1 + static_cast<uint32_t>(bucket);
      }
      case ColoringKind::fiber_constant:
        return 1 + static_cast<uint32_t>(hash_index(spec_.seed, idx / c.extra_order()) % t);
      case ColoringKind::adversarial_left_pack: {
        uint64_t head = (size() + t - 1) / t;
        if (idx < head || t == 1) return 1;
        return 2 + static_cast<uint32_t>((idx - head) % (t - 1));
      }
      case ColoringKind::from_file:
        return spec_.file_colors[idx];
    }
    return 1;
  }

  // Box carrier: color of the tuple a in [1, M]^k
  uint32_t color_point(const std::vector<uint64_t>& a) const {
    const Carrier& c = spec_.carrier;
    uint64_t idx = 0;
    for (size_t i = a.size(); i-- > 0;) idx = idx * c.n + (a[i] - 1);
    return color(idx);
  }

  std::vector<uint64_t> class_sizes() const {
    std::vector<uint64_t> cnt(spec_.t + 1, 0);
    for (uint64_t i = 0; i < size(); ++i) ++cnt[color(i)];
    return cnt;
  }

 private:
  ColoringSpec spec_;
  uint64_t freq_[3] = {0, 0, 0};
  double phase_[3] = {0, 0, 0};
};

inline Coloring gen_coloring(const ColoringSpec& spec) { return Coloring(spec); }

// class with the most elements; ties resolved toward the smaller label
inline uint32_t largest_class(const std::vector<uint64_t>& class_sizes) {
  uint32_t best = 1;
  for (uint32_t m = 2; m < class_sizes.size(); ++m)
    if (class_sizes[m] > class_sizes[best]) best = m;
  return best;
}

}  // namespace raimi
