// renormlab: batch experiment driver for circle-map renormalization.
//
// One experiment per invocation: a subcommand plus a flat key/value
// configuration (flags mirror config-file fields one-to-one, flags
// win). Artifacts land under --out with fixed names; every run also
// writes manifest.json with the effective config and its hash.
//
// Exit codes: 0 success, 1 computational failure, 2 malformed
// config/schema, 3 completed but with precision/undecided flags.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "renormlab/circlemap.hpp"
#include "renormlab/contfrac.hpp"
#include "renormlab/error.hpp"
#include "renormlab/fitting.hpp"
#include "renormlab/geometry.hpp"
#include "renormlab/io.hpp"
#include "renormlab/pairs.hpp"
#include "renormlab/parabolic.hpp"
#include "renormlab/precision.hpp"
#include "renormlab/schema.hpp"

namespace {

using nlohmann::json;
using namespace renormlab;

constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Configuration machinery.

enum class KeyType { dec, integer, str, jsonv };

struct KeySpec {
  const char* name;
  KeyType type;
  json def;
  const char* help;
};

struct Ctx {
  std::string subcommand;
  json cfg;  // effective config (defaults <- file <- flags)
  std::filesystem::path outdir;
  std::size_t workers = 1;
  Precision prec = Precision::f64;
  std::vector<std::string> warnings;
  bool flagged = false;
  json timings = json::object();
};

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw error("cli.schema", "field '" + field + "': " + why);
}

void check_decimal(const std::string& field, const std::string& s) {
  try {
    std::size_t used = 0;
    (void)std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    bad_field(field, "'" + s + "' is not a decimal number");
  }
}

json canonical_cf(const std::string& field, const json& v) {
  try {
    if (v.is_string()) {
      std::string s = v.get<std::string>();
      if (s == "golden") return schema::cf_to_json(cf::ContinuedFraction::golden());
      if (s == "silver") return schema::cf_to_json(cf::ContinuedFraction::silver());
      return schema::cf_to_json(schema::cf_from_json(json::parse(s)));
    }
    return schema::cf_to_json(schema::cf_from_json(v));
  } catch (const json::exception&) {
    bad_field(field, "expected a continued fraction (digits array, "
                     "{head, period}, 'golden' or 'silver')");
  }
}

// Normalize one value from the config file or a flag into the
// canonical in-config representation.
json normalize(const KeySpec& k, const json& v, bool from_flag) {
  const std::string field = k.name;
  switch (k.type) {
    case KeyType::dec: {
      std::string s = schema::json_number_or_string(v);
      check_decimal(field, s);
      return s;
    }
    case KeyType::integer: {
      if (v.is_number_integer()) return v.get<std::int64_t>();
      if (v.is_string()) {
        try {
          std::size_t used = 0;
          std::int64_t n = std::stoll(v.get<std::string>(), &used);
          if (used != v.get<std::string>().size())
            throw std::invalid_argument("");
          return n;
        } catch (const std::exception&) {
          bad_field(field, "'" + v.get<std::string>() + "' is not an integer");
        }
      }
      bad_field(field, "expected an integer");
    }
    case KeyType::str:
      if (!v.is_string()) bad_field(field, "expected a string");
      return v;
    case KeyType::jsonv: {
      json parsed = v;
      if (from_flag && v.is_string()) {
        std::string s = v.get<std::string>();
        if (field == "cf" && (s == "golden" || s == "silver"))
          return canonical_cf(field, v);
        try {
          parsed = json::parse(s);
        } catch (const json::exception&) {
          bad_field(field, "'" + s + "' is not valid JSON");
        }
      }
      if (field == "cf") return canonical_cf(field, parsed);
      if (!parsed.is_object()) bad_field(field, "expected a JSON object");
      return parsed;
    }
  }
  bad_field(field, "unhandled value");
}

bool has(const Ctx& c, const std::string& key) {
  return c.cfg.contains(key) && !c.cfg[key].is_null();
}

std::string str_key(const Ctx& c, const std::string& key) {
  return c.cfg.at(key).get<std::string>();
}

std::int64_t int_key(const Ctx& c, const std::string& key) {
  return c.cfg.at(key).get<std::int64_t>();
}

template <typename Real>
Real dec_key(const Ctx& c, const std::string& key) {
  return parse_decimal<Real>(c.cfg.at(key).get<std::string>());
}

cf::ContinuedFraction cf_key(const Ctx& c) {
  return schema::cf_from_json(c.cfg.at("cf"));
}

// ---------------------------------------------------------------------------
// Map construction shared by most subcommands. The second map of a
// two-map experiment uses the "*2" keys, falling back to the first
// map's family when absent (so the default comparison is the
// identity, detected exactly downstream).

template <typename Real>
map::MapFamily<Real> family_of(const Ctx& c, const std::string& sfx) {
  std::string fkey = "family" + sfx, ekey = "eps" + sfx;
  std::string name = has(c, fkey)       ? str_key(c, fkey)
                     : has(c, "family") ? str_key(c, "family")
                                        : "arnold-cubic";
  if (name == "arnold-cubic") return map::arnold_cubic<Real>();
  if (name == "two-harmonic") {
    Real eps = has(c, ekey)       ? dec_key<Real>(c, ekey)
               : has(c, "eps")    ? dec_key<Real>(c, "eps")
                                  : Real(0.1);
    return map::two_harmonic<Real>(eps);
  }
  bad_field(fkey, "'" + name + "' is not a known family "
                  "(arnold-cubic, two-harmonic)");
}

template <typename Real>
map::CircleMap<Real> make_map(const Ctx& c, const std::string& sfx = "") {
  if (has(c, "map" + sfx))
    return schema::map_from_json<Real>(c.cfg.at("map" + sfx));
  auto fam = family_of<Real>(c, sfx);
  std::string tkey = "theta" + sfx;
  if (has(c, tkey)) return fam.at(dec_key<Real>(c, tkey));
  if (sfx == "2" && has(c, "theta")) return fam.at(dec_key<Real>(c, "theta"));
  if (has(c, "cf")) {
    auto depth = static_cast<std::size_t>(int_key(c, "depth"));
    return fam.at(map::tune_to_rotation(fam, cf_key(c), depth));
  }
  bad_field(tkey, "provide " + tkey + ", cf, or map" + sfx);
}

// ---------------------------------------------------------------------------
// Emission helpers.

void emit_csv(Ctx& c, const std::string& name, const io::Csv& csv) {
  io::write_csv((c.outdir / name).string(), csv);
}

void emit_json(Ctx& c, const std::string& name, const json& j) {
  io::write_json((c.outdir / name).string(), j);
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

template <typename F>
void stage(Ctx& c, const char* name, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  body();
  auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0).count();
  c.timings[name] = dt;
}

void warn(Ctx& c, const std::string& msg, bool flag = true) {
  c.warnings.push_back(msg);
  if (flag) c.flagged = true;
}

void require_f64(Ctx& c) {
  if (c.prec != Precision::f64)
    warn(c, "complex-dynamics subcommands run in binary64; "
            "ext precision request ignored", false);
}

// Run `body` with the Real type selected by the precision mode.
template <typename F>
void with_real(Ctx& c, F&& body) {
  if (c.prec == Precision::f64)
    body(double{});
  else
    body(ext{});
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

void run_rotnum(Ctx& c) {
  with_real(c, [&](auto tag) {
    using Real = decltype(tag);
    map::RotationNumber<Real> rn;
    stage(c, "compute", [&] {
      auto f = make_map<Real>(c);
      rn = map::rotation_number(f, dec_key<Real>(c, "tol"),
                                int_key(c, "max_iter"));
    });
    stage(c, "emit", [&] {
      json out;
      out["rho"] = to_decimal_string(rn.rho);
      out["rational"] = rn.rational;
      out["accuracy_flag"] = rn.accuracy_flag;
      out["digits"] = rn.digits;
      emit_json(c, "rotnum.json", out);
    });
    if (rn.accuracy_flag)
      warn(c, "rotation number: iteration cap reached before tolerance");
  });
}

void run_tune(Ctx& c) {
  if (!has(c, "cf")) bad_field("cf", "tune needs a target rotation number");
  with_real(c, [&](auto tag) {
    using Real = decltype(tag);
    Real theta{};
    stage(c, "compute", [&] {
      auto fam = family_of<Real>(c, "");
      theta = map::tune_to_rotation(
          fam, cf_key(c), static_cast<std::size_t>(int_key(c, "depth")));
    });
    stage(c, "emit", [&] {
      json out;
      out["theta"] = to_decimal_string(theta);
      out["cf"] = c.cfg.at("cf");
      out["depth"] = int_key(c, "depth");
      emit_json(c, "tune.json", out);
    });
  });
}

void run_partition(Ctx& c) {
  with_real(c, [&](auto tag) {
    using Real = decltype(tag);
    geometry::DynamicalPartition<Real> part;
    geometry::BoundsStats stats;
    stage(c, "compute", [&] {
      auto f = make_map<Real>(c);
      part = geometry::partition(
          f, static_cast<std::size_t>(int_key(c, "level")));
      stats = geometry::bounds_stats(part);
    });
    stage(c, "emit", [&] {
      io::Csv csv;
      csv.header = {"start", "length", "deep", "index"};
      for (const auto& a : part.atoms)
        csv.rows.push_back({to_decimal_string(a.start),
                            to_decimal_string(a.length),
                            a.deep ? "1" : "0", std::to_string(a.index)});
      emit_csv(c, "partition.csv", csv);
      json out;
      out["level"] = part.level;
      out["q_m"] = part.q_m;
      out["q_m1"] = part.q_m1;
      out["atom_count"] = part.atoms.size();
      out["total_length"] = to_decimal_string(part.total_length());
      out["k_max"] = stats.k_max;
      out["k_min"] = stats.k_min;
      out["min_exp"] = stats.min_exp;
      out["hist"] = stats.hist;
      emit_json(c, "partition_stats.json", out);
    });
  });
}

void run_renorm(Ctx& c) {
  with_real(c, [&](auto tag) {
    using Real = decltype(tag);
    json levels = json::array();
    json dists = json::array();
    stage(c, "compute", [&] {
      auto f = make_map<Real>(c);
      auto n_levels = static_cast<std::size_t>(int_key(c, "levels"));
      std::vector<pairs::CommutingPair<Real>> chain;
      for (std::size_t n = 0; n <= n_levels; ++n) {
        chain.push_back(pairs::CommutingPair<Real>::from_circle_map(f, n));
        levels.push_back(chain.back().manifest());
      }
      for (std::size_t n = 0; n + 1 < chain.size(); ++n)
        dists.push_back(to_decimal_string(
            pairs::pair_distance(renormalize(chain[n]), chain[n + 1])));
    });
    stage(c, "emit", [&] {
      json out;
      out["levels"] = levels;
      out["renorm_distance"] = dists;
      emit_json(c, "renorm.json", out);
    });
  });
}

void run_converge(Ctx& c) {
  with_real(c, [&](auto tag) {
    using Real = decltype(tag);
    geometry::RenormConvergence<Real> conv;
    stage(c, "compute", [&] {
      auto f1 = make_map<Real>(c);
      auto f2 = make_map<Real>(c, "2");
      conv = geometry::renorm_convergence(
          f1, f2, static_cast<std::size_t>(int_key(c, "levels")),
          static_cast<std::size_t>(int_key(c, "fit_lo")));
    });
    stage(c, "emit", [&] {
      io::Csv csv;
      csv.header = {"n", "d_n"};
      for (std::size_t n = 0; n < conv.d.size(); ++n)
        csv.rows.push_back({std::to_string(n),
                            to_decimal_string(conv.d[n])});
      emit_csv(c, "converge.csv", csv);
      json out;
      out["exact_identity"] = conv.exact_identity;
      out["c"] = conv.c;
      out["mu"] = conv.mu;
      out["r2"] = conv.r2;
      emit_json(c, "converge.json", out);
    });
  });
}

void run_scaling(Ctx& c) {
  with_real(c, [&](auto tag) {
    using Real = decltype(tag);
    geometry::ScalingRatios<Real> sr;
    stage(c, "compute", [&] {
      auto f = make_map<Real>(c);
      sr = geometry::scaling_ratios(
          f, static_cast<std::size_t>(int_key(c, "levels")));
    });
    stage(c, "emit", [&] {
      io::Csv csv;
      csv.header = {"m", "len_Im", "ratio", "aitken"};
      for (std::size_t m = 0; m < sr.ratios.size(); ++m) {
        std::string acc;
        if (m >= 2) {
          std::vector<Real> prefix(sr.ratios.begin(),
                                   sr.ratios.begin() +
                                       static_cast<std::ptrdiff_t>(m) + 1);
          acc = to_decimal_string(
              fitting::aitken(prefix, 100 * machine_eps<Real>()));
        }
        csv.rows.push_back({std::to_string(m),
                            to_decimal_string(sr.lengths[m]),
                            to_decimal_string(sr.ratios[m]), acc});
      }
      emit_csv(c, "scaling.csv", csv);
      json out;
      out["limit"] = to_decimal_string(sr.limit);
      out["drift"] = to_decimal_string(sr.drift);
      emit_json(c, "scaling.json", out);
    });
  });
}

void run_delta(Ctx& c) {
  if (!has(c, "cf")) bad_field("cf", "delta needs a target rotation number");
  with_real(c, [&](auto tag) {
    using Real = decltype(tag);
    geometry::DeltaEstimate<Real> est;
    stage(c, "compute", [&] {
      auto fam = family_of<Real>(c, "");
      est = geometry::delta_estimate(
          fam, cf_key(c), static_cast<std::size_t>(int_key(c, "levels")));
    });
    stage(c, "emit", [&] {
      io::Csv csv;
      csv.header = {"n", "theta", "ratio"};
      for (std::size_t i = 0; i < est.theta.size(); ++i)
        csv.rows.push_back({std::to_string(i + 2),
                            to_decimal_string(est.theta[i]),
                            i < est.ratios.size()
                                ? to_decimal_string(est.ratios[i])
                                : std::string()});
      emit_csv(c, "delta.csv", csv);
      json out;
      out["delta_hat"] = to_decimal_string(est.delta_hat);
      out["truncated"] = est.truncated;
      emit_json(c, "delta.json", out);
    });
    if (est.truncated)
      warn(c, "delta: anchor parameters hit the precision floor");
  });
}

void run_rigidity(Ctx& c) {
  with_real(c, [&](auto tag) {
    using Real = decltype(tag);
    geometry::RegularityFit<Real> fit;
    stage(c, "compute", [&] {
      auto f1 = make_map<Real>(c);
      auto f2 = make_map<Real>(c, "2");
      fit = geometry::regularity_fit(
          f1, f2, static_cast<std::size_t>(int_key(c, "levels")));
    });
    stage(c, "emit", [&] {
      io::Csv csv;
      csv.header = {"m", "t_m"};
      for (std::size_t m = 0; m < fit.t.size(); ++m)
        csv.rows.push_back({std::to_string(m), to_decimal_string(fit.t[m])});
      emit_csv(c, "rigidity.csv", csv);
      json out;
      out["exact_identity"] = fit.exact_identity;
      out["s_limit"] = to_decimal_string(fit.s_limit);
      out["mu_hat"] = fit.mu_hat;
      out["lambda_hat"] = fit.lambda_hat;
      out["alpha_hat"] = fit.alpha_hat;
      out["r2"] = fit.r2;
      out["window_lo"] = fit.window_lo;
      out["window_hi"] = fit.window_hi;
      emit_json(c, "rigidity.json", out);
    });
  });
}

para::SearchBox box_of(const Ctx& c) {
  return {dec_key<double>(c, "box_x0"), dec_key<double>(c, "box_x1"),
          -0.35, 0.35};
}

void run_fatou(Ctx& c) {
  require_f64(c);
  io::Csv csv;
  csv.header = {"index", "z_re", "z_im", "phi_re", "phi_im", "abel_residual"};
  json out;
  double max_res = 0;
  double tol = dec_key<double>(c, "tol");
  stage(c, "compute", [&] {
    auto fam = family_of<double>(c, "");
    std::int64_t p = int_key(c, "p"), q = int_key(c, "q");
    double edge = para::tongue_edge(fam, p, q);
    para::ComplexOrbitMap eta(fam.at(edge), q, p);
    auto pd = para::complex_fixed_points(eta, box_of(c));
    if (!pd.real_parabolic)
      throw error("parabolic.not_parabolic",
                  "no real parabolic point at the tongue edge");
    std::string side_name = str_key(c, "side");
    if (side_name != "attracting" && side_name != "repelling")
      bad_field("side", "'" + side_name + "' (attracting or repelling)");
    para::Side side = side_name == "attracting" ? para::Side::attracting
                                                : para::Side::repelling;
    double sgn = side == para::Side::attracting ? -1.0 : 1.0;
    para::cplx base(pd.p + sgn * dec_key<double>(c, "base_offset"), 0);
    para::FatouCoordinate phi(eta, pd, side, base, tol);

    auto points = int_key(c, "points");
    double err = 0;
    for (std::int64_t i = 0; i < points; ++i) {
      para::cplx z(pd.p + sgn * (0.02 + 0.08 * static_cast<double>(i) /
                                            static_cast<double>(points)),
                   0.01 * static_cast<double>(i % 5 - 2));
      auto v0 = phi(z);
      auto v1 = phi(eta(z));
      double res = std::abs(v1.phi - v0.phi + sgn);
      max_res = std::max(max_res, res);
      err = std::max(err, v0.err);
      csv.rows.push_back({std::to_string(i), to_decimal_string(z.real()),
                          to_decimal_string(z.imag()),
                          to_decimal_string(v0.phi.real()),
                          to_decimal_string(v0.phi.imag()),
                          to_decimal_string(res)});
    }
    out["edge_theta"] = to_decimal_string(edge);
    out["p"] = to_decimal_string(pd.p);
    out["a_re"] = pd.a.real();
    out["a_im"] = pd.a.imag();
    out["b_re"] = pd.b.real();
    out["b_im"] = pd.b.imag();
    out["side"] = side_name;
    out["max_abel_residual"] = max_res;
    out["coordinate_err_bound"] = err;
  });
  stage(c, "emit", [&] {
    emit_csv(c, "fatou.csv", csv);
    emit_json(c, "fatou.json", out);
  });
  if (max_res > tol)
    warn(c, "fatou: Abel residual above tolerance");
}

void run_grid_area(Ctx& c) {
  require_f64(c);
  io::Csv csv;
  csv.header = {"center_re", "center_im", "area", "generation"};
  json out;
  stage(c, "compute", [&] {
    auto fam = family_of<double>(c, "");
    std::int64_t p = int_key(c, "p"), q = int_key(c, "q");
    double edge = para::tongue_edge(fam, p, q);
    double height = static_cast<double>(int_key(c, "height"));
    double theta = edge + pi_v<double>() / (height * height);
    para::ComplexOrbitMap eta(fam.at(theta), q, p);
    auto pd = para::complex_fixed_points(eta, box_of(c));
    double pp = pd.real_parabolic ? pd.p : pd.z_plus.real();

    double x0 = pp - dec_key<double>(c, "x0_offset");
    double step = eta(para::cplx(x0, 0)).real() - x0;
    double radius = step / dec_key<double>(c, "radius_div");
    auto lat = para::parabolic_lattice(
        eta, para::cplx(x0, 0), radius,
        static_cast<std::size_t>(int_key(c, "lattice_depth")));
    double l = dec_key<double>(c, "l");
    auto sum = para::grid_area_sum(
        lat, para::cplx(pp - dec_key<double>(c, "z0_offset"), 0), l);
    for (const auto& im : sum.elements)
      csv.rows.push_back({to_decimal_string(im.centroid.real()),
                          to_decimal_string(im.centroid.imag()),
                          to_decimal_string(im.area),
                          std::to_string(im.generation)});
    out["theta"] = to_decimal_string(theta);
    out["height"] = int_key(c, "height");
    out["c_hat"] = sum.c_hat;
    out["area_sum"] = sum.area_sum;
    out["l"] = l;
    out["window_center_re"] = sum.window_center.real();
    out["window_center_im"] = sum.window_center.imag();
    out["lattice_images"] = lat.images.size();
    out["lattice_dropped"] = lat.dropped;
    out["elements"] = sum.elements.size();
  });
  stage(c, "emit", [&] {
    emit_csv(c, "grid_area.csv", csv);
    emit_json(c, "grid_area.json", out);
  });
}

para::Raster compute_raster(Ctx& c) {
  auto f = make_map<double>(c);
  return para::julia_raster(
      f, static_cast<std::size_t>(int_key(c, "level")),
      static_cast<std::size_t>(int_key(c, "resolution")),
      static_cast<int>(int_key(c, "max_iter")),
      dec_key<double>(c, "k_range"), c.workers);
}

json raster_sidecar(const para::Raster& r) {
  json out;
  out["resolution"] = r.resolution;
  out["level"] = r.level;
  out["max_iter"] = r.max_iter;
  out["half"] = to_decimal_string(r.half);
  out["k_range"] = r.k_range;
  out["degenerate"] = r.degenerate;
  return out;
}

void run_julia(Ctx& c) {
  require_f64(c);
  para::Raster r;
  stage(c, "compute", [&] { r = compute_raster(c); });
  stage(c, "emit", [&] {
    io::write_pgm((c.outdir / "julia.pgm").string(), r.resolution,
                  r.resolution, r.pixels);
    emit_json(c, "julia.json", raster_sidecar(r));
  });
  if (r.degenerate) warn(c, "julia: every sampled point escaped");
}

void run_deep_point(Ctx& c) {
  require_f64(c);
  para::DeepPointProfile prof;
  para::Raster r;
  stage(c, "compute", [&] {
    r = compute_raster(c);
    std::vector<double> radii;
    double lo = dec_key<double>(c, "r_min"), hi = dec_key<double>(c, "r_max");
    double fac = dec_key<double>(c, "r_factor");
    if (!(lo > 0 && hi > lo && fac > 1))
      bad_field("r_min", "need 0 < r_min < r_max and r_factor > 1");
    for (double x = lo; x <= hi * (1 + 1e-12); x *= fac) radii.push_back(x);
    prof = para::deep_point_profile(r, radii);
  });
  stage(c, "emit", [&] {
    io::Csv csv;
    csv.header = {"r", "s"};
    for (std::size_t i = 0; i < prof.r.size(); ++i)
      csv.rows.push_back({to_decimal_string(prof.r[i]),
                          to_decimal_string(prof.s[i])});
    emit_csv(c, "deep_point.csv", csv);
    json out = raster_sidecar(r);
    out["slope"] = prof.slope;
    out["beta"] = prof.beta;
    out["r2"] = prof.r2;
    out["usable_radii"] = prof.r.size();
    emit_json(c, "deep_point.json", out);
  });
}

// ---------------------------------------------------------------------------
// Key tables. Shared fragments first.

const std::vector<KeySpec> kMapKeys = {
    {"family", KeyType::str, "arnold-cubic", "map family name"},
    {"eps", KeyType::dec, "0.1", "two-harmonic second-harmonic size"},
    {"theta", KeyType::dec, nullptr, "map parameter (decimal string)"},
    {"map", KeyType::jsonv, nullptr, "inline map JSON (theta + harmonics)"},
    {"cf", KeyType::jsonv, nullptr,
     "rotation number as continued fraction (or golden/silver)"},
    {"depth", KeyType::integer, 16, "tuning depth when cf is given"},
};

const std::vector<KeySpec> kSecondMapKeys = {
    {"family2", KeyType::str, nullptr, "second map family (default: family)"},
    {"eps2", KeyType::dec, nullptr, "second map eps (default: eps)"},
    {"theta2", KeyType::dec, nullptr, "second map parameter"},
    {"map2", KeyType::jsonv, nullptr, "second map inline JSON"},
};

const std::vector<KeySpec> kTongueKeys = {
    {"family", KeyType::str, "arnold-cubic", "map family name"},
    {"eps", KeyType::dec, "0.1", "two-harmonic second-harmonic size"},
    {"p", KeyType::integer, 0, "tongue rotation number numerator"},
    {"q", KeyType::integer, 1, "tongue rotation number denominator"},
    {"box_x0", KeyType::dec, "0", "fixed-point search window, left edge"},
    {"box_x1", KeyType::dec, "1", "fixed-point search window, right edge"},
};

std::vector<KeySpec> cat(std::vector<KeySpec> a,
                         const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

struct SubSpec {
  const char* name;
  const char* help;
  std::vector<KeySpec> keys;
  void (*run)(Ctx&);
};

const std::vector<SubSpec>& subcommands() {
  static const std::vector<SubSpec> subs = {
      {"rotnum", "rotation number of a map",
       cat(kMapKeys,
           {{"tol", KeyType::dec, "1e-9", "rotation number tolerance"},
            {"max_iter", KeyType::integer, 50'000'000, "orbit budget"}}),
       run_rotnum},
      {"tune", "parameter with a prescribed rotation number",
       cat(kMapKeys, {}), run_tune},
      {"partition", "dynamical partition atoms and comparability stats",
       cat(kMapKeys, {{"level", KeyType::integer, 5, "partition level m"}}),
       run_partition},
      {"renorm", "commuting-pair chain across renormalization levels",
       cat(kMapKeys, {{"levels", KeyType::integer, 8, "chain depth"}}),
       run_renorm},
      {"converge", "pair distance between two maps across levels",
       cat(cat(kMapKeys, kSecondMapKeys),
           {{"levels", KeyType::integer, 12, "levels to compare"},
            {"fit_lo", KeyType::integer, 4, "first level of the rate fit"}}),
       run_converge},
      {"scaling", "closest-return interval scaling ratios",
       cat(kMapKeys, {{"levels", KeyType::integer, 12, "ratio count"}}),
       run_scaling},
      {"delta", "parameter-scaling multiplier estimate",
       cat(kMapKeys, {{"levels", KeyType::integer, 12, "anchor depth"}}),
       run_delta},
      {"rigidity", "conjugacy regularity exponent from matched lengths",
       cat(cat(kMapKeys, kSecondMapKeys),
           {{"levels", KeyType::integer, 14, "length levels"}}),
       run_rigidity},
      {"fatou", "Fatou coordinate Abel-equation residuals",
       cat(kTongueKeys,
           {{"side", KeyType::str, "attracting", "attracting or repelling"},
            {"tol", KeyType::dec, "1e-6", "Abel residual tolerance"},
            {"base_offset", KeyType::dec, "0.05",
             "basepoint distance from the parabolic point"},
            {"points", KeyType::integer, 32, "validation points"}}),
       run_fatou},
      {"grid-area", "parabolic lattice pointed area sums",
       cat(kTongueKeys,
           {{"height", KeyType::integer, 200, "tongue height parameter r"},
            {"x0_offset", KeyType::dec, "0.1", "lattice seed offset"},
            {"z0_offset", KeyType::dec, "0.05", "window center offset"},
            {"l", KeyType::dec, "0.04", "window size"},
            {"radius_div", KeyType::dec, "2.5", "seed radius = step/this"},
            {"lattice_depth", KeyType::integer, 40, "images each way"}}),
       run_grid_area},
      {"julia", "escape-time raster of the pair attractor",
       cat(kMapKeys,
           {{"level", KeyType::integer, 3, "pair level"},
            {"resolution", KeyType::integer, 1024, "pixels per side (2^k)"},
            {"max_iter", KeyType::integer, 256, "escape iteration cap"},
            {"k_range", KeyType::dec, "2", "escape disk radius factor"}}),
       run_julia},
      {"deep-point", "deep-point exponent from an escape-time raster",
       cat(kMapKeys,
           {{"level", KeyType::integer, 3, "pair level"},
            {"resolution", KeyType::integer, 2048, "pixels per side (2^k)"},
            {"max_iter", KeyType::integer, 512, "escape iteration cap"},
            {"k_range", KeyType::dec, "2", "escape disk radius factor"},
            {"r_min", KeyType::dec, "0.001953125", "smallest probe radius"},
            {"r_max", KeyType::dec, "0.125", "largest probe radius"},
            {"r_factor", KeyType::dec, "2", "radius progression factor"}}),
       run_deep_point},
  };
  return subs;
}

const KeySpec* find_key(const SubSpec& sub, const std::string& name) {
  for (const auto& k : sub.keys)
    if (name == k.name) return &k;
  return nullptr;
}

// Build the effective config: defaults, then the config file, then
// flag overrides. "precision" is accepted everywhere so an echoed
// config reproduces the run exactly.
json effective_config(const SubSpec& sub, const std::string& config_path,
                      const std::map<std::string, std::string>& overrides,
                      const std::string& precision_flag) {
  json cfg = json::object();
  for (const auto& k : sub.keys) cfg[k.name] = k.def;
  cfg["precision"] = nullptr;

  if (!config_path.empty()) {
    json file;
    try {
      file = json::parse(io::read_file(config_path));
    } catch (const json::exception& e) {
      throw error("cli.schema", std::string("config file: ") + e.what());
    }
    if (!file.is_object())
      throw error("cli.schema", "config file: expected a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (value.is_null()) continue;
      if (key == "precision") {
        cfg["precision"] = normalize({"precision", KeyType::str, nullptr, ""},
                                     value, false);
        continue;
      }
      const KeySpec* spec = find_key(sub, key);
      if (!spec) bad_field(key, "unknown field for '" + std::string(sub.name) + "'");
      cfg[key] = normalize(*spec, value, false);
    }
  }

  for (const auto& [key, raw] : overrides) {
    const KeySpec* spec = find_key(sub, key);
    if (!spec) bad_field(key, "unknown field");
    cfg[key] = normalize(*spec, raw, true);
  }
  if (!precision_flag.empty()) cfg["precision"] = precision_flag;
  return cfg;
}

Precision parse_precision(const json& cfg) {
  std::string value = "f64";
  if (cfg.contains("precision") && !cfg["precision"].is_null())
    value = cfg["precision"].get<std::string>();
  else if (const char* env = std::getenv("RENORMLAB_PRECISION"))
    value = env;
  if (value == "f64") return Precision::f64;
  if (value == "ext") return Precision::extended;
  bad_field("precision", "'" + value + "' (expected f64 or ext)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"renormlab: renormalization experiments on critical "
               "circle maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir = ".", precision_flag;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  bool echo_config = false;
  app.add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "parallelism cap");
  app.add_option("--precision", precision_flag, "f64 or ext")
      ->check(CLI::IsMember({"f64", "ext"}));
  app.add_flag("--echo-config", echo_config,
               "print the effective config and exit");

  std::map<std::string, std::string> overrides;
  std::map<std::string, const SubSpec*> parsed;
  for (const auto& sub : subcommands()) {
    auto* s = app.add_subcommand(sub.name, sub.help);
    s->fallthrough();
    parsed[sub.name] = &sub;
    for (const auto& k : sub.keys) {
      std::string key = k.name;
      s->add_option_function<std::string>(
          "--" + key,
          [&overrides, key](const std::string& v) { overrides[key] = v; },
          k.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const SubSpec* sub = parsed.at(app.get_subcommands().front()->get_name());

  Ctx ctx;
  ctx.subcommand = sub->name;
  ctx.workers = std::max<std::size_t>(1, workers);
  try {
    ctx.cfg = effective_config(*sub, config_path, overrides, precision_flag);
    ctx.prec = parse_precision(ctx.cfg);
    ctx.cfg["precision"] = precision_name(ctx.prec);

    if (echo_config) {
      std::cout << ctx.cfg.dump(2) << "\n";
      return 0;
    }

    ctx.outdir = out_dir;
    std::filesystem::create_directories(ctx.outdir);
    auto t0 = std::chrono::steady_clock::now();
    sub->run(ctx);
    auto total = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["subcommand"] = ctx.subcommand;
    manifest["version"] = kVersion;
    manifest["config"] = ctx.cfg;
    manifest["config_hash"] = fnv1a_hex(ctx.cfg.dump());
    manifest["precision"] = precision_name(ctx.prec);
    manifest["workers"] = ctx.workers;
    ctx.timings["total"] = total;
    manifest["timings"] = ctx.timings;
    manifest["warnings"] = ctx.warnings;
    emit_json(ctx, "manifest.json", manifest);

    for (const auto& w : ctx.warnings) std::cerr << "warning: " << w << "\n";
    return ctx.flagged ? 3 : 0;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const std::string& code = e.code();
    bool schema = code.rfind("cli.", 0) == 0 || code.rfind("schema.", 0) == 0;
    return schema ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
