#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coloring.hpp"
#include "cyclic_raimi.hpp"
#include "errors.hpp"
#include "fs_sequence.hpp"
#include "sl2.hpp"
#include "torus_partition.hpp"
#include "weyl.hpp"

namespace raimi {

// Insertion order is preserved so identical runs serialize byte-identically.
using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline std::string rational_text(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

inline Rational rational_from_text(const std::string& s) {
  size_t slash = s.find('/');
  if (slash == std::string::npos) return Rational(BigInt(s));
  BigInt num(s.substr(0, slash)), den(s.substr(slash + 1));
  if (den == 0) throw PreconditionViolated("zero denominator: " + s);
  return Rational(num, den);
}

inline const char* carrier_kind_name(CarrierKind k) {
  switch (k) {
    case CarrierKind::Zn: return "zn";
    case CarrierKind::ProductZnG: return "product_zn_g";
    case CarrierKind::Sl2: return "sl2";
    case CarrierKind::Box: return "box";
  }
  return "?";
}

inline Json to_json(const Carrier& c) {
  Json j{{"kind", carrier_kind_name(c.kind)}, {"n", c.n}};
  if (c.kind == CarrierKind::Box) j["box_k"] = c.box_k;
  if (c.kind == CarrierKind::ProductZnG) j["orders"] = c.orders;
  return j;
}

inline Json to_json(const ColoringSpec& s) {
  Json j{{"carrier", to_json(s.carrier)},
         {"kind", coloring_kind_name(s.kind)},
         {"t", s.t},
         {"seed", s.seed}};
  if (s.kind == ColoringKind::from_file) j["colors"] = s.file_colors.size();
  return j;
}

inline Json to_json(const FsSequence& fs) {
  Json elems = Json::array();
  for (const BigInt& e : fs.elements) elems.push_back(e.str());
  return Json{{"beta", fs.beta.descriptor()},
              {"eps", rational_text(fs.eps)},
              {"elements", elems}};
}

inline Json to_json(const FsReport& rep) {
  return Json{{"pass", rep.pass},         {"exhaustive", rep.exhaustive},
              {"checked", rep.checked},   {"uncertain", rep.uncertain},
              {"max_norm", rep.max_norm}, {"worst_mask", rep.worst_mask},
              {"worst_sum", rep.worst_sum.str()}, {"bound", rep.bound}};
}

inline Json to_json(const HdWitness& w) {
  return Json{{"h", w.h}, {"piece", w.piece}, {"base_point", w.a}};
}

inline Json to_json(const HdCertificate& cert) {
  Json witnesses = Json::array(), failures = Json::array();
  for (const auto& w : cert.witnesses) witnesses.push_back(to_json(w));
  for (const auto& [h, piece] : cert.failures)
    failures.push_back(Json{{"h", h}, {"piece", piece}});
  return Json{{"m", cert.m},
              {"interval", {rational_text(cert.J_lo), rational_text(cert.J_hi)}},
              {"j_star", cert.j_star},
              {"x0", cert.x0},
              {"sigma", cert.sigma},
              {"eps", rational_text(cert.eps)},
              {"fs", to_json(cert.fs)},
              {"sample_masks", cert.sample_masks},
              {"shifts", cert.sampled_h},
              {"counts", cert.counts},
              {"witnesses", witnesses},
              {"failures", failures},
              {"pass", cert.pass}};
}

inline Json to_json(const PolyCertificate& cert) {
  Json witnesses = Json::array(), failures = Json::array();
  for (const auto& w : cert.witnesses) witnesses.push_back(to_json(w));
  for (const auto& f : cert.failures)
    failures.push_back(Json{{"h", f.h}, {"poly", f.poly}, {"piece", f.piece}});
  return Json{{"m", cert.m},
              {"interval", {rational_text(cert.J_lo), rational_text(cert.J_hi)}},
              {"j_star", cert.j_star},
              {"x0", cert.x0},
              {"sigma", cert.sigma},
              {"eps", rational_text(cert.eps)},
              {"scan_n", cert.scan_n},
              {"hit_count", cert.hit_count},
              {"uncertain_count", cert.uncertain_count},
              {"shift_cap", cert.shift_cap},
              {"selected_h", cert.selected_h},
              {"counts", cert.counts},
              {"witnesses", witnesses},
              {"failures", failures},
              {"pass", cert.pass}};
}

inline Json to_json(const CyclicPartition& part) {
  return Json{{"n", part.N},           {"r", part.r},
              {"t", part.t},           {"k", part.k},
              {"s_k", rational_text(part.S_k)}, {"delta", part.delta},
              {"remainder", part.remainder}};
}

inline Json to_json(const CyclicShiftCertificate& cert) {
  std::vector<bool> stages(cert.stage_ok.begin(), cert.stage_ok.end());
  return Json{{"m", cert.m},
              {"h_list", cert.h_list},
              {"h", cert.h},
              {"counts", cert.counts},
              {"alpha", rational_text(cert.alpha_used)},
              {"stage_ok", stages},
              {"pass", cert.pass}};
}

inline Json to_json(const AbelianLiftCertificate& cert) {
  return Json{{"base", to_json(cert.base)},
              {"h_g", cert.h_g},
              {"extra_order", cert.extra},
              {"counts", cert.counts},
              {"threshold", rational_text(cert.threshold)},
              {"pass", cert.pass}};
}

inline Json to_json(const SL2Mat& m) {
  return Json::array({m.x, m.y, m.z, m.w});
}

inline Json to_json(const DirectionCertificate& d) {
  return Json{{"v", {d.v1, d.v2}},
              {"good_lambdas", d.good_lambdas},
              {"t_eff", d.t_eff},
              {"c", rational_text(d.c)},
              {"lemma_regime", d.lemma_regime},
              {"diag_v", {d.diag_v1, d.diag_v2}},
              {"diag_second_moment", d.diag_sum}};
}

inline Json to_json(const SL2ShiftCertificate& cert) {
  return Json{{"q", cert.q},
              {"r", cert.r},
              {"t", cert.t},
              {"m", cert.m},
              {"transposed", cert.transposed},
              {"direction", to_json(cert.direction)},
              {"h", to_json(cert.h)},
              {"counts", cert.counts},
              {"min_count", cert.min_count},
              {"alpha", rational_text(cert.alpha)},
              {"strong_threshold", rational_text(cert.strong_threshold)},
              {"pass", cert.pass}};
}

inline Json to_json(const XEpsReport& rep) {
  Json prefixes = Json::array();
  for (const auto& p : rep.prefixes)
    prefixes.push_back(Json{{"n", p.n},
                            {"hits", p.hits},
                            {"density", p.density},
                            {"ci", {p.ci_low, p.ci_high}}});
  return Json{{"eps", rational_text(rep.eps)},
              {"n", rep.n},
              {"hit_count", rep.hits.size()},
              {"uncertain_count", rep.uncertain_count},
              {"density", rep.empirical_density},
              {"predicted", rep.predicted},
              {"predicted_exact", rep.predicted_exact},
              {"prefixes", prefixes},
              {"prefix_min_density", rep.prefix_min_density}};
}

inline Json error_json(const Error& e) {
  Json inner{{"kind", e.kind()}, {"message", e.what()}};
  if (const auto* small = dynamic_cast<const TooSmallN*>(&e)) inner["n0"] = small->n0;
  return Json{{"error", inner}};
}

// Artifacts appear complete or not at all: content lands in a sibling
// temporary first and is renamed over the target.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PreconditionViolated("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw PreconditionViolated("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// JSON Lines stream with a self-describing first record.
class JsonlWriter {
 public:
  JsonlWriter(std::filesystem::path path, Json header) : path_(std::move(path)) {
    header.erase("schema_version");
    Json first{{"schema_version", kSchemaVersion}, {"tool", "raimi"}};
    first.update(header);
    buffer_ = first.dump() + "\n";
  }

  void write(const Json& record) { buffer_ += record.dump() + "\n"; }

  void finalize() { atomic_write_text(path_, buffer_); }

 private:
  std::filesystem::path path_;
  std::string buffer_;
};

}  // namespace raimi
