#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "raimi/json_io.hpp"

using namespace raimi;

namespace {

// "p/q", "0.25", or "7"; always exact
Rational parse_fraction(const std::string& s) {
  if (s.empty()) throw PreconditionViolated("empty number");
  size_t slash = s.find('/');
  if (slash != std::string::npos) return rational_from_text(s);
  size_t dot = s.find('.');
  if (dot == std::string::npos) return Rational(BigInt(s));
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  if (digits.empty() || digits == "-") throw PreconditionViolated("bad number: " + s);
  BigInt den = 1;
  for (size_t i = dot + 1; i < s.size(); ++i) den *= 10;
  return Rational(BigInt(digits), den);
}

RealExpr parse_beta(const std::string& s) {
  if (s == "sqrt2") return RealExpr::sqrt_int(2);
  if (s == "golden" || s == "phi") return RealExpr::golden();
  if (s.rfind("sqrt:", 0) == 0) return RealExpr::sqrt_int(std::stoull(s.substr(5)));
  if (s.rfind("log2:", 0) == 0) return RealExpr::log2_int(std::stoull(s.substr(5)));
  if (s.rfind("rat:", 0) == 0) return RealExpr::rational(parse_fraction(s.substr(4)));
  if (s.find_first_not_of("0123456789./-") == std::string::npos)
    return RealExpr::rational(parse_fraction(s));
  throw PreconditionViolated("unknown beta descriptor: " + s);
}

std::vector<uint64_t> parse_orders(const std::string& s) {
  std::vector<uint64_t> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    uint64_t v = std::stoull(s.substr(start, comma - start));
    if (v == 0) throw PreconditionViolated("group orders must be positive");
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

ColoringSpec build_spec(Carrier carrier, const std::string& coloring, uint32_t t,
                        uint64_t seed) {
  ColoringSpec spec;
  spec.carrier = std::move(carrier);
  spec.t = t;
  spec.seed = seed;
  if (coloring.rfind("file:", 0) == 0) {
    spec.kind = ColoringKind::from_file;
    std::string path = coloring.substr(5);
    std::ifstream in(path);
    if (!in) throw PreconditionViolated("cannot read coloring file: " + path);
    uint64_t c = 0;
    while (in >> c) {
      if (c < 1 || c > t)
        throw PreconditionViolated("color out of range in " + path);
      spec.file_colors.push_back(static_cast<uint32_t>(c));
    }
  } else {
    spec.kind = coloring_kind_from_name(coloring);
  }
  return spec;
}

std::string fmt9(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", x);
  return buf;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    atomic_write_text(out_path, text);
}

int report_error(const Error& e) {
  Json j = error_json(e);
  if (e.kind() == "PreconditionViolated")
    j["error"]["message"] = "precondition: " + std::string(e.what());
  std::cerr << j.dump() << "\n";
  return 2;
}

// One certificate subcommand run: a single trial becomes one self-contained
// document, several trials become a JSON Lines stream with a header record.
class TrialRun {
 public:
  TrialRun(std::string subcommand, Json config, std::string out_path, uint64_t trials,
           uint64_t root_seed)
      : subcommand_(std::move(subcommand)),
        config_(std::move(config)),
        out_(std::move(out_path)),
        trials_(trials),
        root_(root_seed) {
    if (trials_ == 0) throw PreconditionViolated("need at least one trial");
  }

  uint64_t trials() const { return trials_; }
  uint64_t seed_of(uint64_t trial) const {
    return trials_ == 1 ? root_ : derive_seed(root_, trial);
  }

  void add(uint64_t trial, const Json& certificate, bool pass) {
    records_.push_back(Json{
        {"trial", trial}, {"seed", seed_of(trial)}, {"certificate", certificate}});
    if (!pass) ++failed_;
  }

  // a trial aborted mid-stream; earlier results are still written
  void add_error(uint64_t trial, const Error& e) {
    Json j = error_json(e);
    records_.push_back(
        Json{{"trial", trial}, {"seed", seed_of(trial)}, {"error", j["error"]}});
  }

  int finish() {
    if (trials_ == 1 && records_.size() == 1 && !records_[0].contains("error")) {
      Json doc{{"schema_version", kSchemaVersion},
               {"tool", "raimi"},
               {"subcommand", subcommand_},
               {"config", config_},
               {"certificate", records_[0]["certificate"]}};
      emit(out_, doc.dump(2) + "\n");
    } else {
      Json header{{"schema_version", kSchemaVersion},
                  {"tool", "raimi"},
                  {"subcommand", subcommand_},
                  {"config", config_}};
      std::string text = header.dump() + "\n";
      for (const Json& rec : records_) text += rec.dump() + "\n";
      emit(out_, text);
    }
    if (failed_ > 0) {
      Json err{{"error",
                {{"kind", "CertificateFailed"},
                 {"message", std::to_string(failed_) + " of " + std::to_string(trials_) +
                                 " trials failed"}}}};
      std::cerr << err.dump() << "\n";
      return 1;
    }
    return 0;
  }

 private:
  std::string subcommand_;
  Json config_;
  std::string out_;
  uint64_t trials_;
  uint64_t root_;
  std::vector<Json> records_;
  uint64_t failed_ = 0;
};

// Runs fn(trial, seed) -> (certificate json, pass). A module error on the
// first trial is a configuration problem; later ones truncate the stream.
template <typename Fn>
int run_trials(TrialRun& run, Fn&& fn) {
  for (uint64_t trial = 0; trial < run.trials(); ++trial) {
    try {
      auto [cert, pass] = fn(trial, run.seed_of(trial));
      run.add(trial, cert, pass);
    } catch (const Error& e) {
      if (trial == 0) throw;
      run.add_error(trial, e);
      run.finish();
      return report_error(e);
    }
  }
  return run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified shift certificates for torus, cyclic, and SL2 partitions"};
  app.require_subcommand(1);
  unsigned precision_bits = 0;
  app.add_option("--precision-bits", precision_bits,
                 "working precision override (default 256 or RAIMI_PRECISION_BITS)");

  // defaults shared by several subcommands
  std::string coloring = "random", out_path, polys_text, beta_text = "sqrt2";
  uint64_t trials = 1, seed = 0;
  uint32_t r = 2, t = 2;

  auto* hd = app.add_subcommand("hd", "diagonal shift certificate on a k-dimensional box");
  uint32_t hd_k = 2;
  uint64_t hd_box = 10000, hd_fs_k = 3, hd_x0_max = 10000;
  hd->add_option("--k", hd_k, "box dimension")->required();
  hd->add_option("--r", r, "number of pieces")->required();
  hd->add_option("--t", t, "number of colors")->required();
  hd->add_option("--box", hd_box, "box side M")->required();
  hd->add_option("--fs-k", hd_fs_k, "finite-sums depth K");
  hd->add_option("--x0-max", hd_x0_max, "largest base shift tried");
  hd->add_option("--coloring", coloring, "random|intervals|residues|fourier_sparse|adversarial_left_pack|file:PATH");
  hd->add_option("--trials", trials, "independent colorings");
  hd->add_option("--seed", seed, "root seed");
  hd->add_option("--out", out_path, "output path (stdout when omitted)");

  auto* poly = app.add_subcommand("poly", "polynomial shift certificate on a box");
  uint32_t poly_k = 2;
  uint64_t poly_box = 10000, poly_scan = 0;
  poly->add_option("--k", poly_k, "box dimension")->required();
  poly->add_option("--r", r, "number of pieces")->required();
  poly->add_option("--t", t, "number of colors")->required();
  poly->add_option("--box", poly_box, "box side M")->required();
  poly->add_option("--polys", polys_text, "comma-separated family, e.g. \"x,x^2\"")->required();
  poly->add_option("--scan-n", poly_scan, "scan horizon (default: box side)");
  poly->add_option("--coloring", coloring, "coloring kind or file:PATH");
  poly->add_option("--trials", trials, "independent colorings");
  poly->add_option("--seed", seed, "root seed");
  poly->add_option("--out", out_path, "output path (stdout when omitted)");

  auto* cyclic = app.add_subcommand("cyclic", "shift certificate on Z_N");
  uint64_t cyc_n = 0;
  std::string gprime;
  cyclic->add_option("--n", cyc_n, "carrier size N")->required();
  cyclic->add_option("--r", r, "number of pieces")->required();
  cyclic->add_option("--t", t, "number of colors")->required();
  cyclic->add_option("--gprime", gprime, "extra abelian factor, e.g. \"2,3\"");
  cyclic->add_option("--coloring", coloring, "coloring kind or file:PATH");
  cyclic->add_option("--trials", trials, "independent colorings");
  cyclic->add_option("--seed", seed, "root seed");
  cyclic->add_option("--out", out_path, "output path (stdout when omitted)");

  auto* sl2 = app.add_subcommand("sl2", "shift certificate on SL2(F_q)");
  uint32_t sl2_q = 0;
  bool allow_small_q = false;
  sl2->add_option("--q", sl2_q, "odd prime field size")->required();
  sl2->add_option("--r", r, "number of pieces")->required();
  sl2->add_option("--t", t, "number of colors")->required();
  sl2->add_flag("--allow-small-q", allow_small_q, "skip the q > 8rt admissibility gate");
  sl2->add_option("--coloring", coloring, "coloring kind or file:PATH");
  sl2->add_option("--trials", trials, "independent colorings");
  sl2->add_option("--seed", seed, "root seed");
  sl2->add_option("--out", out_path, "output path (stdout when omitted)");

  auto* equi = app.add_subcommand("equidist", "hit-density sweep of the eps-box orbit set");
  std::string eps_text, csv_path;
  uint64_t equi_n = 0;
  equi->add_option("--beta", beta_text, "sqrt2|golden|sqrt:N|log2:M|rat:p/q|decimal");
  equi->add_option("--polys", polys_text, "comma-separated family")->required();
  equi->add_option("--eps", eps_text, "box half-width, exact fraction or decimal")->required();
  equi->add_option("--n", equi_n, "scan horizon")->required();
  equi->add_option("--csv", csv_path, "CSV path (stdout when omitted)");

  auto* fs = app.add_subcommand("fs", "finite-sums sequence with certified subset norms");
  std::string fs_eps_text;
  uint64_t fs_k = 3, fs_samples = 1ull << 16, fs_limit = 20;
  bool fs_verify = true, fs_sampling = false;
  fs->add_option("--beta", beta_text, "irrational descriptor")->required();
  fs->add_option("--eps", fs_eps_text, "target norm bound")->required();
  fs->add_option("--K", fs_k, "sequence length");
  fs->add_flag("--verify,!--no-verify", fs_verify, "check all subset sums (default on)");
  fs->add_option("--exhaustive-limit", fs_limit, "largest K checked exhaustively");
  fs->add_flag("--allow-sampling", fs_sampling, "sample subsets past the limit");
  fs->add_option("--samples", fs_samples, "sample count when sampling");
  fs->add_option("--seed", seed, "sampling seed");
  fs->add_option("--out", out_path, "output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  PrecisionConfig cfg = PrecisionConfig::defaults();
  if (precision_bits != 0) cfg.precision_bits = precision_bits;

  try {
    if (hd->parsed()) {
      Json config{{"k", hd_k},       {"r", r},
                  {"t", t},          {"box", hd_box},
                  {"fs_k", hd_fs_k}, {"x0_max", hd_x0_max},
                  {"coloring", coloring}, {"trials", trials},
                  {"seed", seed},    {"precision_bits", cfg.precision_bits}};
      TorusPartitionSpec spec = TorusPartitionSpec::log_primes(r, hd_k, cfg);
      TrialRun run("hd", config, out_path, trials, seed);
      return run_trials(run, [&](uint64_t, uint64_t s) {
        HdParams params;
        params.M = hd_box;
        params.K = static_cast<uint32_t>(hd_fs_k);
        params.seed = s;
        params.x0_max = hd_x0_max;
        Coloring col(build_spec({CarrierKind::Box, hd_box, hd_k, {}}, coloring, t, s));
        HdCertificate cert = hd_certify(col, spec, params);
        return std::pair<Json, bool>(to_json(cert), cert.pass);
      });
    }

    if (poly->parsed()) {
      Json config{{"k", poly_k},     {"r", r},
                  {"t", t},          {"box", poly_box},
                  {"polys", polys_text}, {"scan_n", poly_scan},
                  {"coloring", coloring}, {"trials", trials},
                  {"seed", seed},    {"precision_bits", cfg.precision_bits}};
      TorusPartitionSpec spec = TorusPartitionSpec::log_primes(r, poly_k, cfg);
      auto family = parse_poly_family(polys_text);
      TrialRun run("poly", config, out_path, trials, seed);
      return run_trials(run, [&](uint64_t, uint64_t s) {
        PolyParams params;
        params.M = poly_box;
        params.scan_n = poly_scan;
        Coloring col(build_spec({CarrierKind::Box, poly_box, poly_k, {}}, coloring, t, s));
        PolyCertificate cert = poly_raimi_certify(col, spec, family, params);
        return std::pair<Json, bool>(to_json(cert), cert.pass);
      });
    }

    if (cyclic->parsed()) {
      Json config{{"n", cyc_n},   {"r", r},
                  {"t", t},       {"coloring", coloring},
                  {"trials", trials}, {"seed", seed},
                  {"precision_bits", cfg.precision_bits}};
      if (!gprime.empty()) config["gprime"] = gprime;
      CyclicPartition part = build_partition(cyc_n, r, t);
      TrialRun run("cyclic", config, out_path, trials, seed);
      if (gprime.empty()) {
        return run_trials(run, [&](uint64_t, uint64_t s) {
          Coloring col(build_spec({CarrierKind::Zn, cyc_n, 0, {}}, coloring, t, s));
          CyclicShiftCertificate cert = find_shift(col, part);
          return std::pair<Json, bool>(to_json(cert), cert.pass);
        });
      }
      std::vector<uint64_t> orders = parse_orders(gprime);
      return run_trials(run, [&](uint64_t, uint64_t s) {
        Coloring col(
            build_spec({CarrierKind::ProductZnG, cyc_n, 0, orders}, coloring, t, s));
        AbelianLiftCertificate cert = abelian_lift(cyc_n, orders, col, r, t);
        return std::pair<Json, bool>(to_json(cert), cert.pass);
      });
    }

    if (sl2->parsed()) {
      Json config{{"q", sl2_q},   {"r", r},
                  {"t", t},       {"allow_small_q", allow_small_q},
                  {"coloring", coloring}, {"trials", trials},
                  {"seed", seed}, {"precision_bits", cfg.precision_bits}};
      TrialRun run("sl2", config, out_path, trials, seed);
      return run_trials(run, [&](uint64_t, uint64_t s) {
        Coloring col(build_spec({CarrierKind::Sl2, sl2_q, 0, {}}, coloring, t, s));
        SL2ShiftCertificate cert = find_shift_sl2(col, r, t, allow_small_q);
        return std::pair<Json, bool>(to_json(cert), cert.pass);
      });
    }

    if (equi->parsed()) {
      RealExpr beta = parse_beta(beta_text);
      auto family = parse_poly_family(polys_text);
      Rational eps = parse_fraction(eps_text);
      XEpsReport rep = find_x_eps(beta, family, eps, equi_n, cfg);
      std::string csv = "prefix_N,hits,density,predicted,ci_low,ci_high\n";
      for (const PrefixDensity& p : rep.prefixes)
        csv += std::to_string(p.n) + "," + std::to_string(p.hits) + "," +
               fmt9(p.density) + "," + fmt9(rep.predicted) + "," + fmt9(p.ci_low) +
               "," + fmt9(p.ci_high) + "\n";
      emit(csv_path, csv);
      return 0;
    }

    if (fs->parsed()) {
      RealExpr beta = parse_beta(beta_text);
      Rational eps = parse_fraction(fs_eps_text);
      Json config{{"beta", beta_text},
                  {"eps", rational_text(eps)},
                  {"K", fs_k},
                  {"verify", fs_verify},
                  {"exhaustive_limit", fs_limit},
                  {"allow_sampling", fs_sampling},
                  {"samples", fs_samples},
                  {"seed", seed},
                  {"precision_bits", cfg.precision_bits}};
      FsSequence seq = build_fs(beta, eps, static_cast<unsigned>(fs_k), cfg);
      Json doc{{"schema_version", kSchemaVersion},
               {"tool", "raimi"},
               {"subcommand", "fs"},
               {"config", config},
               {"sequence", to_json(seq)}};
      bool pass = true;
      if (fs_verify) {
        FsVerifyOptions opt;
        opt.exhaustive_limit = static_cast<unsigned>(fs_limit);
        opt.allow_sampling = fs_sampling;
        opt.sample_count = fs_samples;
        opt.seed = seed;
        FsReport rep = verify_fs(seq, opt, cfg);
        doc["report"] = to_json(rep);
        pass = rep.pass;
      }
      emit(out_path, doc.dump(2) + "\n");
      if (!pass) {
        Json err{{"error",
                  {{"kind", "CertificateFailed"},
                   {"message", "a subset sum exceeded the certified bound"}}}};
        std::cerr << err.dump() << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const Error& e) {
    return report_error(e);
  }
  return 2;
}
