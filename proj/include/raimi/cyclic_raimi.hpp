#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "coloring.hpp"
#include "errors.hpp"
#include "precise_real.hpp"

namespace raimi {

// Interval hierarchy of Z_N: E_1 = [0, Delta_1] is closed, later pieces are
// half-open (u_i, v_i], and the remainder past v_r is merged into E_r.
struct CyclicPartition {
  uint64_t N = 0;
  uint32_t r = 0, t = 0;
  uint64_t k = 0;                // 1 + 2^{r+3} t
  Rational S_k;                  // 1 + 1/k + ... + 1/k^{r-1}
  std::vector<uint64_t> delta;   // Delta_1..Delta_r, each dividing the previous by k
  std::vector<uint64_t> u, v;    // open left ends and nominal right ends, u_1 = 0
  uint64_t remainder = 0;        // N - 1 - v_r, absorbed by E_r

  // inclusive index range of piece i (1-based); E_r extends through N-1
  uint64_t piece_lo(uint32_t i) const { return i == 1 ? 0 : u[i - 1] + 1; }
  uint64_t piece_hi(uint32_t i) const { return i == r ? N - 1 : v[i - 1]; }

  uint64_t piece_size(uint32_t i) const { return piece_hi(i) - piece_lo(i) + 1; }
};

inline CyclicPartition build_partition(uint64_t N, uint32_t r, uint32_t t) {
  if (r == 0 || t == 0) throw PreconditionViolated("need r >= 1 and t >= 1");
  if (r > 24) throw PreconditionViolated("refinement depth out of supported range");

  BigInt k = BigInt(1) + (BigInt(t) << (r + 3));
  BigInt D = 0, kp = 1;  // D = k^{r-1} S_k = 1 + k + ... + k^{r-1}
  for (uint32_t i = 0; i < r; ++i) {
    D += kp;
    kp *= k;
  }
  if (BigInt(N) < D + 1) {
    uint64_t n0 = (D + 1 > BigInt(UINT64_MAX)) ? UINT64_MAX
                                               : (D + 1).convert_to<uint64_t>();
    throw TooSmallN(n0);
  }

  CyclicPartition part;
  part.N = N;
  part.r = r;
  part.t = t;
  part.k = k.convert_to<uint64_t>();

  BigInt kr1 = 1;  // k^{r-1}
  for (uint32_t i = 0; i + 1 < r; ++i) kr1 *= k;
  part.S_k = Rational(D, kr1);

  uint64_t q = (BigInt(N - 1) / D).convert_to<uint64_t>();
  part.delta.resize(r);
  part.delta[0] = (kr1 * q).convert_to<uint64_t>();
  for (uint32_t i = 1; i < r; ++i) part.delta[i] = part.delta[i - 1] / part.k;

  part.u.resize(r);
  part.v.resize(r);
  part.u[0] = 0;
  part.v[0] = part.delta[0];
  for (uint32_t i = 1; i < r; ++i) {
    part.u[i] = part.v[i - 1];
    part.v[i] = part.u[i] + part.delta[i];
  }
  part.remainder = N - 1 - part.v[r - 1];
  return part;
}

namespace detail {

// prefix[i] = #{x < i : color(x) = m}
inline std::vector<uint64_t> class_prefix(const Coloring& coloring, uint32_t m) {
  uint64_t N = coloring.size();
  std::vector<uint64_t> pref(N + 1, 0);
  for (uint64_t x = 0; x < N; ++x)
    pref[x + 1] = pref[x] + (coloring.color(x) == m ? 1 : 0);
  return pref;
}

// members of the prefix-counted set inside {start, start+1, ..., start+len-1} mod N
inline uint64_t cyc_count(const std::vector<uint64_t>& pref, uint64_t start, uint64_t len) {
  uint64_t N = pref.size() - 1;
  start %= N;
  if (start + len <= N) return pref[start + len] - pref[start];
  return (pref[N] - pref[start]) + pref[start + len - N];
}

}  // namespace detail

struct H1Result {
  uint32_t m = 0;
  uint64_t h1 = 0;
  uint64_t count = 0;  // |(F_m + h1) ∩ E_1|
};

// Largest color class (ties toward the smallest index), then the smallest
// shift h1 with |(F_m + h1) ∩ E_1| >= |E_1| / t; existence follows from the
// averaging identity sum_h |(F_m + h) ∩ E_1| = |F_m| |E_1|.
inline H1Result find_h1(const Coloring& coloring, const CyclicPartition& part) {
  const Carrier& car = coloring.spec().carrier;
  if (car.kind != CarrierKind::Zn || car.n != part.N)
    throw PreconditionViolated("coloring carrier must be Z_N for this partition");
  if (coloring.t() != part.t)
    throw PreconditionViolated("coloring class count must match the partition");

  H1Result res;
  res.m = largest_class(coloring.class_sizes());
  std::vector<uint64_t> pref = detail::class_prefix(coloring, res.m);

  uint64_t len = part.delta[0] + 1;  // |E_1|
  for (uint64_t h = 0; h < part.N; ++h) {
    uint64_t cnt = detail::cyc_count(pref, part.N - h % part.N, len);
    if ((unsigned __int128)cnt * part.t >= len) {
      res.h1 = h;
      res.count = cnt;
      return res;
    }
  }
  throw InternalInvariantBroken("averaging guarantees an admissible h1");
}

// Running refinement state: the class prefix plus the shifts chosen so far.
struct CyclicScanState {
  const CyclicPartition* part = nullptr;
  std::vector<uint64_t> pref;
  uint32_t m = 0;
  std::vector<uint64_t> h;  // h_1..h_s
  uint64_t total = 0;       // sum mod N
};

// Stage s (1-based): split E_s into k blocks of length Delta_{s+1}, take the
// rightmost block holding at least half the stage density 1/(t 2^s), and
// shift it onto E_{s+1}. Always succeeds on states produced by find_h1; a
// failure indicates an implementation bug, not an input condition.
inline uint64_t refine_step(CyclicScanState& st, uint32_t s) {
  const CyclicPartition& part = *st.part;
  if (s < 1 || s >= part.r || st.h.size() != s)
    throw PreconditionViolated("stage index out of order");

  uint64_t dn = part.delta[s];  // Delta_{s+1}
  for (uint64_t j = part.k; j >= 1; --j) {
    uint64_t a = part.u[s - 1] + (j - 1) * dn;
    uint64_t cnt = detail::cyc_count(st.pref, (a + 1 + part.N - st.total % part.N), dn);
    if ((unsigned __int128)cnt * part.t * ((uint64_t)1 << s) >= dn) {
      uint64_t next = part.u[s] - a;
      if (next == 0 || next > part.delta[s - 1])
        throw InternalInvariantBroken("refinement shift out of range");
      st.h.push_back(next);
      st.total = (st.total + next) % part.N;
      return next;
    }
  }
  throw InternalInvariantBroken("averaging guarantees a qualifying block");
}

struct CyclicShiftCertificate {
  uint32_t m = 0;
  std::vector<uint64_t> h_list;  // h_1..h_r
  uint64_t h = 0;                // sum mod N
  std::vector<uint64_t> counts;  // |(F_m + h) ∩ E_i|, remainder included in E_r
  Rational alpha_used;           // Delta_1 / (t k^{r-1} 2^{r+2} N)
  std::vector<bool> stage_ok;    // counts_s t 2^{s+2} >= Delta_s
  bool pass = false;             // counts_i >= alpha_used N on every piece
};

// Compose find_h1 with r-1 refinement steps and verify the certificate:
// per-stage margins counts_s >= Delta_s / (t 2^{s+2}) are recorded, the pass
// flag gates on the global bound alpha N.
inline CyclicShiftCertificate find_shift(const Coloring& coloring,
                                         const CyclicPartition& part) {
  H1Result first = find_h1(coloring, part);

  CyclicScanState st;
  st.part = &part;
  st.pref = detail::class_prefix(coloring, first.m);
  st.m = first.m;
  st.h.push_back(first.h1);
  st.total = first.h1 % part.N;
  for (uint32_t s = 1; s < part.r; ++s) refine_step(st, s);

  CyclicShiftCertificate cert;
  cert.m = first.m;
  cert.h_list = st.h;
  cert.h = st.total;

  BigInt kr1 = 1;
  for (uint32_t i = 0; i + 1 < part.r; ++i) kr1 *= part.k;
  cert.alpha_used = Rational(BigInt(part.delta[0]),
                             BigInt(part.t) * kr1 * pow2(part.r + 2) * part.N);

  bool pass = true;
  for (uint32_t i = 1; i <= part.r; ++i) {
    uint64_t lo = part.piece_lo(i);
    uint64_t cnt = detail::cyc_count(st.pref, lo + part.N - cert.h % part.N,
                                     part.piece_size(i));
    cert.counts.push_back(cnt);
    cert.stage_ok.push_back((unsigned __int128)cnt * part.t *
                                ((uint64_t)1 << (i + 2)) >=
                            part.delta[i - 1]);
    // counts_i >= alpha N  <=>  counts_i t k^{r-1} 2^{r+2} >= Delta_1
    if (BigInt(cnt) * part.t * kr1 * pow2(part.r + 2) < part.delta[0]) pass = false;
  }
  cert.pass = pass;
  return cert;
}

struct AbelianLiftCertificate {
  CyclicShiftCertificate base;   // certificate of the slice coloring on Z_N
  std::vector<uint64_t> h_g;     // identity component of the lifted shift
  uint64_t extra = 1;            // |G'|
  std::vector<uint64_t> counts;  // product counts per piece E_i x G'
  Rational threshold;            // (alpha / t) |G|
  bool pass = false;
};

// Slice the product coloring along G': m(x) = argmax_m |A_m(x)| (ties toward
// the smallest class) defines a t-coloring of Z_N whose chosen class has
// fibers of size >= |G'|/t; the cyclic shift lifts as (h, 0).
inline AbelianLiftCertificate abelian_lift(uint64_t N, const std::vector<uint64_t>& orders,
                                           const Coloring& coloring, uint32_t r,
                                           uint32_t t) {
  const Carrier& car = coloring.spec().carrier;
  if (car.kind != CarrierKind::ProductZnG || car.n != N || car.orders != orders)
    throw PreconditionViolated("coloring carrier must be Z_N x G'");
  if (coloring.t() != t)
    throw PreconditionViolated("coloring class count must match t");

  CyclicPartition part = build_partition(N, r, t);
  uint64_t extra = car.extra_order();

  std::vector<uint32_t> slice(N);
  std::vector<uint64_t> tally(t + 1);
  for (uint64_t x = 0; x < N; ++x) {
    std::fill(tally.begin(), tally.end(), 0);
    for (uint64_t y = 0; y < extra; ++y) ++tally[coloring.color(x * extra + y)];
    uint32_t best = 1;
    for (uint32_t m = 2; m <= t; ++m)
      if (tally[m] > tally[best]) best = m;
    slice[x] = best;
  }

  ColoringSpec cspec;
  cspec.carrier = {CarrierKind::Zn, N, 0, {}};
  cspec.kind = ColoringKind::from_file;
  cspec.t = t;
  cspec.file_colors = slice;
  Coloring slice_coloring(cspec);

  AbelianLiftCertificate cert;
  cert.base = find_shift(slice_coloring, part);
  cert.h_g.assign(orders.size(), 0);
  cert.extra = extra;
  cert.threshold = cert.base.alpha_used * N * extra / t;

  // weighted prefix over fiber sizes of the chosen class
  std::vector<uint64_t> wpref(N + 1, 0);
  for (uint64_t x = 0; x < N; ++x) {
    uint64_t w = 0;
    for (uint64_t y = 0; y < extra; ++y)
      if (coloring.color(x * extra + y) == cert.base.m) ++w;
    wpref[x + 1] = wpref[x] + w;
  }
  auto wcount = [&](uint64_t start, uint64_t len) {
    start %= N;
    if (start + len <= N) return wpref[start + len] - wpref[start];
    return (wpref[N] - wpref[start]) + wpref[start + len - N];
  };

  bool pass = true;
  for (uint32_t i = 1; i <= part.r; ++i) {
    uint64_t cnt =
        wcount(part.piece_lo(i) + N - cert.base.h % N, part.piece_size(i));
    cert.counts.push_back(cnt);
    if (Rational(BigInt(cnt)) < cert.threshold) pass = false;
  }
  cert.pass = pass;
  return cert;
}

}  // namespace raimi
