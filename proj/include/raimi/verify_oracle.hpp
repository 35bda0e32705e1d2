#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "coloring.hpp"
#include "errors.hpp"
#include "sl2.hpp"

namespace raimi {

// Partition of Z_N into consecutive inclusive residue ranges [lo, hi].
using ZnPieces = std::vector<std::pair<uint64_t, uint64_t>>;

struct OracleResult {
  uint64_t best_shift = 0;
  uint64_t best_min_count = 0;
  std::vector<uint64_t> counts;  // per piece, at best_shift
};

inline constexpr uint64_t kZnOracleLimit = 10000;

// Exhaustive max-min over all cyclic shifts h of the designated class m:
// maximizes min_i |(F_m + h) mod N  intersect  E_i|. Ties toward smaller h.
inline OracleResult brute_best_shift_zn(const Coloring& coloring, uint32_t m,
                                        const ZnPieces& pieces,
                                        uint64_t oracle_limit = kZnOracleLimit) {
  uint64_t N = coloring.size();
  if (coloring.spec().carrier.kind != CarrierKind::Zn)
    throw PreconditionViolated("cyclic oracle needs a Z_N carrier");
  if (N > oracle_limit) throw OracleLimitExceeded("carrier exceeds oracle limit");
  if (pieces.empty()) throw PreconditionViolated("empty partition");

  // prefix[i] = #{x < i : color(x) = m}
  std::vector<uint64_t> prefix(N + 1, 0);
  for (uint64_t x = 0; x < N; ++x)
    prefix[x + 1] = prefix[x] + (coloring.color(x) == m ? 1 : 0);
  uint64_t total = prefix[N];
  auto range_count = [&](uint64_t lo, uint64_t hi) {  // inclusive, lo <= hi < N
    return prefix[hi + 1] - prefix[lo];
  };
  // count of class-m points in the cyclic range [lo, hi] (may wrap)
  auto cyclic_count = [&](uint64_t lo, uint64_t hi) {
    if (lo <= hi) return range_count(lo, hi);
    return range_count(lo, N - 1) + range_count(0, hi);
  };

  OracleResult best;
  bool have = false;
  std::vector<uint64_t> counts(pieces.size());
  for (uint64_t h = 0; h < N; ++h) {
    uint64_t mn = UINT64_MAX;
    for (size_t i = 0; i < pieces.size(); ++i) {
      auto [a, b] = pieces[i];
      // y in [a,b] with color(y-h) = m  <=>  x in [a-h, b-h] cyclic
      uint64_t lo = (a + N - h % N) % N;
      uint64_t hi = (b + N - h % N) % N;
      uint64_t cnt = (b + 1 - a >= N) ? total : cyclic_count(lo, hi);
      counts[i] = cnt;
      mn = std::min(mn, cnt);
    }
    if (!have || mn > best.best_min_count) {
      best.best_shift = h;
      best.best_min_count = mn;
      best.counts = counts;
      have = true;
    }
  }
  return best;
}

struct Sl2OracleResult {
  uint32_t a = 0, c = 0;  // first column shared by every optimal shift
  SL2Mat h;               // one completion of that column to SL2
  uint64_t best_min_count = 0;
  std::vector<uint64_t> counts;  // per piece, at the best column
};

inline constexpr uint64_t kSl2OracleLimit = 13;

// Exhaustive max-min over right shifts F_m h. The piece of M h depends on h
// only through its first column (a, c), so scanning the q^2 - 1 nonzero
// columns covers all q^3 - q group elements. Ties toward smaller (a, c).
inline Sl2OracleResult brute_best_shift_sl2(const Coloring& coloring, uint32_t m,
                                            const SL2Partition& part,
                                            uint64_t oracle_limit = kSl2OracleLimit) {
  if (coloring.spec().carrier.kind != CarrierKind::Sl2)
    throw PreconditionViolated("group oracle needs an SL2 carrier");
  uint32_t q = static_cast<uint32_t>(coloring.spec().carrier.n);
  if (q != part.q) throw PreconditionViolated("partition field mismatch");
  if (q > oracle_limit) throw OracleLimitExceeded("field exceeds oracle limit");

  std::vector<std::pair<uint32_t, uint32_t>> rows;  // (x, y) of class-m members
  for (uint64_t idx = 0; idx < sl2_size(q); ++idx)
    if (coloring.color(idx) == m) {
      SL2Mat mat = index_to_mat(q, idx);
      rows.emplace_back(mat.x, mat.y);
    }

  Sl2OracleResult best;
  bool have = false;
  std::vector<uint64_t> counts(part.r);
  for (uint32_t a = 0; a < q; ++a)
    for (uint32_t c = 0; c < q; ++c) {
      if (a == 0 && c == 0) continue;
      std::fill(counts.begin(), counts.end(), 0);
      for (const auto& [x, y] : rows)
        ++counts[part.piece_of_x(((uint64_t)x * a + (uint64_t)y * c) % q) - 1];
      uint64_t mn = *std::min_element(counts.begin(), counts.end());
      if (!have || mn > best.best_min_count) {
        best.a = a;
        best.c = c;
        best.best_min_count = mn;
        best.counts = counts;
        have = true;
      }
    }
  best.h = best.a != 0
               ? SL2Mat{best.a, 0, best.c, detail::fq_inv(q, best.a)}
               : SL2Mat{0, (q - detail::fq_inv(q, best.c)) % q, best.c, 0};
  return best;
}

}  // namespace raimi
