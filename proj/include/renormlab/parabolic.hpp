#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "renormlab/circlemap.hpp"
#include "renormlab/error.hpp"
#include "renormlab/fitting.hpp"

namespace renormlab::para {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// eta = tau^{-p} o lift^q on complex arguments: the trigonometric lift
// is entire, so the iterate extends off the real line verbatim.

class ComplexOrbitMap {
 public:
  ComplexOrbitMap(map::CircleMap<double> f, std::int64_t q, std::int64_t p)
      : f_(std::move(f)), q_(q), p_(p) {
    if (q < 1) throw error("parabolic.exponent", "need q >= 1");
  }

  std::int64_t exponent() const { return q_; }
  std::int64_t translation() const { return p_; }
  const map::CircleMap<double>& base() const { return f_; }

  cplx operator()(cplx z) const {
    for (std::int64_t i = 0; i < q_; ++i) z = lift(z);
    return z - static_cast<double>(p_);
  }

  cplx derivative(cplx z) const {
    cplx d = 1;
    for (std::int64_t i = 0; i < q_; ++i) {
      d *= lift_d(z, 1);
      z = lift(z);
    }
    return d;
  }

  // (eta(z), eta'(z), eta''(z), eta'''(z)) by the composition chain rule
  struct Jet {
    cplx value, d1, d2, d3;
  };
  Jet jet(cplx z) const {
    cplx d1 = 1, d2 = 0, d3 = 0;
    for (std::int64_t i = 0; i < q_; ++i) {
      cplx l1 = lift_d(z, 1), l2 = lift_d(z, 2), l3 = lift_d(z, 3);
      d3 = l3 * d1 * d1 * d1 + 3.0 * l2 * d1 * d2 + l1 * d3;
      d2 = l2 * d1 * d1 + l1 * d2;
      d1 = l1 * d1;
      z = lift(z);
    }
    return {z - static_cast<double>(p_), d1, d2, d3};
  }

  cplx lift(cplx z) const {
    const double two_pi = 2 * pi_v<double>();
    cplx acc = z + f_.theta();
    const auto& hs = f_.harmonics();
    for (std::size_t k = 1; k <= hs.size(); ++k) {
      double w = two_pi * static_cast<double>(k);
      acc += hs[k - 1].a * std::sin(w * z);
      if (hs[k - 1].b != 0) acc += hs[k - 1].b * (std::cos(w * z) - 1.0);
    }
    return acc;
  }

 private:
  cplx lift_d(cplx z, int order) const {
    const double two_pi = 2 * pi_v<double>();
    cplx acc = order == 1 ? 1.0 : 0.0;
    const auto& hs = f_.harmonics();
    for (std::size_t k = 1; k <= hs.size(); ++k) {
      double w = two_pi * static_cast<double>(k);
      cplx s = std::sin(w * z), c = std::cos(w * z);
      switch (order) {
        case 1: acc += w * (hs[k - 1].a * c - hs[k - 1].b * s); break;
        case 2: acc += w * w * (-hs[k - 1].a * s - hs[k - 1].b * c); break;
        case 3: acc += w * w * w * (-hs[k - 1].a * c + hs[k - 1].b * s); break;
      }
    }
    return acc;
  }

  map::CircleMap<double> f_;
  std::int64_t q_, p_;
};

// ---------------------------------------------------------------------------
// Fixed-point analysis near a (nearly) parabolic point.

struct ParabolicData {
  bool real_parabolic = false;
  double p = 0;                  // real parabolic point (real case)
  cplx z_plus, z_minus;          // conjugate pair (complex case)
  cplx lambda_plus, lambda_minus;
  cplx alpha;                    // lambda_plus = exp(2 pi i alpha)
  cplx a;                        // quadratic coefficient of the local expansion
  cplx b;                        // log-correction coefficient 1 - c/a^2
  double petal_radius = 0;
};

struct SearchBox {
  double x0, x1, y0, y1;
};

inline ParabolicData complex_fixed_points(const ComplexOrbitMap& eta,
                                          SearchBox box,
                                          std::size_t grid = 12) {
  if (!(box.y0 < 0 && box.y1 > 0))
    throw error("parabolic.search_box", "box must straddle the real axis");
  std::vector<cplx> roots;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      cplx z(box.x0 + (box.x1 - box.x0) * (i + 0.5) / grid,
             box.y0 + (box.y1 - box.y0) * (j + 0.5) / grid);
      bool ok = false;
      for (int it = 0; it < 80; ++it) {
        cplx g = eta(z) - z;
        if (std::abs(g) < 1e-13 * (1.0 + std::abs(z))) {
          ok = true;
          break;
        }
        cplx dg = eta.derivative(z) - 1.0;
        if (std::abs(dg) < 1e-300) break;
        cplx step = g / dg;
        if (std::abs(step) > 1.0) step /= std::abs(step);
        z -= step;
      }
      if (!ok) continue;
      if (z.real() < box.x0 || z.real() > box.x1 || z.imag() < box.y0 ||
          z.imag() > box.y1)
        continue;
      bool dup = false;
      for (auto& r : roots)
        if (std::abs(r - z) < 1e-8) dup = true;
      if (!dup) roots.push_back(z);
    }
  }
  if (roots.empty())
    throw error("parabolic.no_fixed_point", "no fixed point in box");

  ParabolicData out;
  // Prefer a genuinely complex root in the upper half plane. Newton at
  // a parabolic double root stalls with |Im z| up to ~sqrt(tol), so a
  // small imaginary part is treated as real and refined below.
  cplx best = roots.front();
  for (auto& r : roots)
    if (r.imag() > best.imag()) best = r;
  bool complex_pair = best.imag() > 1e-6;
  if (!complex_pair) {
    // real-parabolic candidate: solve eta'(x) = 1 on the real axis
    double x = best.real();
    bool refined = false;
    for (int it = 0; it < 60; ++it) {
      auto j = eta.jet(cplx(x, 0));
      double g = j.d1.real() - 1.0;
      if (std::abs(g) < 1e-13) {
        refined = true;
        break;
      }
      if (std::abs(j.d2.real()) < 1e-300) break;
      x -= g / j.d2.real();
    }
    if (refined && std::abs(eta(cplx(x, 0)).real() - x) < 1e-8) {
      out.real_parabolic = true;
      out.p = x;
      out.z_plus = out.z_minus = cplx(x, 0);
    } else {
      // plain real fixed point: the one with multiplier nearest 1
      double score = 1e300;
      for (auto& r : roots) {
        double s = std::abs(eta.derivative(cplx(r.real(), 0)) - 1.0);
        if (s < score) {
          score = s;
          best = cplx(r.real(), 0);
        }
      }
      out.real_parabolic = true;
      out.p = best.real();
      out.z_plus = out.z_minus = cplx(best.real(), 0);
    }
  } else {
    out.real_parabolic = false;
    out.z_plus = best;
    out.z_minus = std::conj(best);
  }
  auto jet = eta.jet(out.z_plus);
  out.lambda_plus = jet.d1;
  out.lambda_minus = eta.derivative(out.z_minus);
  const cplx two_pi_i(0, 2 * pi_v<double>());
  out.alpha = std::log(out.lambda_plus) / two_pi_i;
  out.a = jet.d2 / 2.0;
  cplx c = jet.d3 / 6.0;
  out.b = 1.0 - c / (out.a * out.a);
  double ratio = std::abs(c) > 0 ? std::abs(out.a / c) : 1.0;
  out.petal_radius = std::min(0.5, 0.5 * ratio);
  return out;
}

// ---------------------------------------------------------------------------
// Fatou coordinates: Phi(eta(z)) = Phi(z) + 1 on the attracting petal,
// Phi(eta(z)) = Phi(z) - 1 on the repelling one. Realized as the limit
// of u(eta^n(z)) - n - b log n with u(z) = -1/(a (z - p)); the log
// correction comes from the cubic term of the local expansion.

enum class Side { attracting, repelling };

// Evaluation stops at the first orbit point inside a fixed far region
// |u| >= U (not at a fixed iterate count), where the asymptotic
// V(w) = u -+ b log(+-u) applies. Because the orbit of eta(z) is the
// exact tail of the orbit of z, the stopping point is shared and the
// Abel relation holds to machine precision; the reported error is the
// O(log U / U) deviation of V from the canonical coordinate.
class FatouCoordinate {
 public:
  struct Value {
    cplx phi;
    double err;
  };

  FatouCoordinate(ComplexOrbitMap eta, const ParabolicData& data, Side side,
                  cplx base, double tol = 1e-6, std::int64_t n_limit = 100000,
                  double stop_u = 1e4)
      : eta_(std::move(eta)),
        p_(data.real_parabolic ? cplx(data.p, 0) : data.z_plus),
        a_(data.a),
        b_(data.b),
        side_(side),
        base_(base),
        tol_(tol),
        n_limit_(n_limit),
        stop_u_(stop_u) {
    norm_ = 0;
    norm_ = (*this)(base).phi;
  }

  Side side() const { return side_; }
  cplx base() const { return base_; }
  double stop_u() const { return stop_u_; }

  Value operator()(cplx z) const {
    const double sign = side_ == Side::attracting ? 1.0 : -1.0;
    cplx w = z;
    double u_start = (sign * u(w)).real();
    double u_best = u_start;
    cplx phi;
    double err;
    std::int64_t n = 0;
    while (true) {
      cplx su = sign * u(w);
      if (su.real() >= stop_u_) {
        // far region reached: V(w) = u - b log(su) in the oriented frame
        phi = sign * (su - b_ * std::log(su)) - sign * static_cast<double>(n);
        err = std::abs(b_) * (1 + std::log(stop_u_)) / stop_u_;
        break;
      }
      u_best = std::max(u_best, su.real());
      // inside a petal the oriented Abel coordinate advances by ~1 per
      // step; a stalled or receding orbit is not converging to p
      if (su.real() < u_start - 2.0 ||
          (n >= 16 && su.real() < u_start + 0.5 * static_cast<double>(n) - 4.0))
        throw error("parabolic.not_in_petal",
                    "orbit leaves the petal neighborhood");
      if (n >= n_limit_) {
        // slow convergence: best available value with its error bound
        phi = sign * (su - b_ * std::log(su)) - sign * static_cast<double>(n);
        err = std::abs(b_) * (1 + std::log(std::max(2.0, u_best))) /
              std::max(2.0, u_best);
        break;
      }
      w = advance(w);
      ++n;
    }
    if (side_ == Side::repelling) phi = -phi;
    return {phi - norm_, err};
  }

 private:
  // u(z) = -1/(a (z - p)); on the attracting side Re u -> +infinity
  // along the orbit, on the repelling side Re u -> -infinity backward.
  cplx u(cplx z) const { return -1.0 / (a_ * (z - p_)); }

  cplx advance(cplx w) const {
    if (side_ == Side::attracting) return eta_(w);
    // backward branch by Newton, seeded at the point itself (eta is
    // close to the identity near the parabolic point)
    cplx target = w, x = w;
    for (int it = 0; it < 80; ++it) {
      cplx g = eta_(x) - target;
      if (std::abs(g) < 1e-14 * (1.0 + std::abs(x))) {
        // polish to the floating-point floor: the residual of this
        // inversion is amplified by dPhi/dw ~ |a| u^2 near the
        // stopping region, so 1e-14 is not good enough there
        for (int extra = 0; extra < 3; ++extra)
          x -= (eta_(x) - target) / eta_.derivative(x);
        return x;
      }
      x -= g / eta_.derivative(x);
    }
    throw error("parabolic.backward_orbit", "inverse branch did not converge");
  }

  ComplexOrbitMap eta_;
  cplx p_, a_, b_;
  Side side_;
  cplx base_;
  double tol_;
  std::int64_t n_limit_;
  double stop_u_;
  cplx norm_;
};

// ---------------------------------------------------------------------------
// Transit through an almost-parabolic cascade.

struct DouadyPhase {
  std::int64_t n_cascade = 0;
  double theta_phase = 0;
  cplx alpha;
  bool flagged = false;  // cap reached: too close to parabolic
};

inline DouadyPhase douady_phase(const ComplexOrbitMap& eta,
                                const ParabolicData& data, double a, double r,
                                std::int64_t cap = 5'000'000) {
  if (data.real_parabolic)
    throw error("parabolic.not_perturbed",
                "douady phase needs a complex conjugate pair");
  if (std::abs(std::arg(data.alpha)) >= pi_v<double>() / 4)
    throw error("parabolic.arg_alpha", "need |arg alpha| < pi/4");
  DouadyPhase out;
  out.alpha = data.alpha;
  double x = a;
  while (x < r) {
    x = eta(cplx(x, 0)).real();
    ++out.n_cascade;
    if (out.n_cascade >= cap) {
      out.flagged = true;
      break;
    }
  }
  double inv = (1.0 / data.alpha).real();
  out.theta_phase = inv - std::floor(inv);
  return out;
}

// ---------------------------------------------------------------------------
// Disk images under the parabolic dynamics, tracked as boundary
// polygons (conformal images of disks are not disks).

struct DiskImage {
  std::vector<cplx> boundary;
  cplx centroid;
  double area = 0;
  int generation = 0;  // +k: k-th forward image, -k: k-th preimage
};

inline double polygon_area(const std::vector<cplx>& poly) {
  double s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const cplx& u = poly[i];
    const cplx& v = poly[(i + 1) % poly.size()];
    s += u.real() * v.imag() - v.real() * u.imag();
  }
  return std::abs(s) / 2;
}

inline cplx polygon_centroid(const std::vector<cplx>& poly) {
  cplx s = 0;
  for (auto& v : poly) s += v;
  return s / static_cast<double>(poly.size());
}

inline std::vector<cplx> circle_polygon(cplx center, double radius,
                                        std::size_t n = 64) {
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double t = 2 * pi_v<double>() * static_cast<double>(k) / n;
    out[k] = center + radius * cplx(std::cos(t), std::sin(t));
  }
  return out;
}

namespace detail {

inline bool segments_cross(cplx a, cplx b, cplx c, cplx d) {
  auto orient = [](cplx p, cplx q, cplx r) {
    double v = (q.real() - p.real()) * (r.imag() - p.imag()) -
               (q.imag() - p.imag()) * (r.real() - p.real());
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
  };
  return orient(a, b, c) != orient(a, b, d) &&
         orient(c, d, a) != orient(c, d, b) && orient(a, b, c) != 0 &&
         orient(c, d, a) != 0;
}

inline bool self_intersects(const std::vector<cplx>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // shared vertex
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j],
                         poly[(j + 1) % n]))
        return true;
    }
  }
  return false;
}

}  // namespace detail

struct Lattice {
  std::vector<DiskImage> images;
  std::size_t dropped = 0;
};

// Forward images and principal-branch preimages of Delta up to `depth`
// steps each way; distorted (self-intersecting) polygons are dropped.
inline Lattice parabolic_lattice(const ComplexOrbitMap& eta, cplx center,
                                 double radius, std::size_t depth,
                                 std::size_t vertices = 64) {
  Lattice out;
  auto push = [&out](std::vector<cplx> poly, int gen) {
    if (detail::self_intersects(poly)) {
      ++out.dropped;
      return;
    }
    DiskImage im;
    im.area = polygon_area(poly);
    im.centroid = polygon_centroid(poly);
    im.boundary = std::move(poly);
    im.generation = gen;
    out.images.push_back(std::move(im));
  };

  std::vector<cplx> base = circle_polygon(center, radius, vertices);
  push(base, 0);

  std::vector<cplx> fwd = base;
  for (std::size_t k = 1; k <= depth; ++k) {
    for (auto& v : fwd) v = eta(v);
    push(fwd, static_cast<int>(k));
  }
  std::vector<cplx> bwd = base;
  for (std::size_t k = 1; k <= depth; ++k) {
    bool ok = true;
    for (auto& v : bwd) {
      cplx target = v, x = v;
      bool conv = false;
      for (int it = 0; it < 80; ++it) {
        cplx g = eta(x) - target;
        if (std::abs(g) < 1e-13 * (1.0 + std::abs(x))) {
          conv = true;
          break;
        }
        x -= g / eta.derivative(x);
      }
      if (!conv) {
        ok = false;
        break;
      }
      v = x;
    }
    if (!ok) {
      ++out.dropped;
      break;
    }
    push(bwd, -static_cast<int>(k));
  }
  return out;
}

inline cplx tau_minus(cplx z, cplx z_minus) {
  return z_minus - 1.0 / (z - z_minus);
}

// ---------------------------------------------------------------------------
// Pointed-window area sum: best C_hat = sum area / l^2 over candidate
// windows centered at lattice elements near z0.

struct LatticeSummary {
  cplx window_center;
  double window_radius = 0;  // l / 2
  double l = 0;
  std::vector<DiskImage> elements;  // elements inside the chosen window
  double area_sum = 0;
  double c_hat = 0;
};

inline LatticeSummary grid_area_sum(const Lattice& lattice, cplx z0,
                                    double l) {
  std::vector<cplx> candidates;
  for (const auto& im : lattice.images) {
    double d = std::abs(im.centroid - z0);
    if (d >= l / 2 && d <= 2 * l) candidates.push_back(im.centroid);
  }
  if (candidates.empty()) {
    double nearest = 1e300;
    for (const auto& im : lattice.images)
      nearest = std::min(nearest, std::abs(im.centroid - z0));
    throw error("parabolic.no_window",
                "no lattice element at the requested scale; nearest lies at "
                "distance " +
                    std::to_string(nearest));
  }
  LatticeSummary best;
  best.c_hat = -1;
  for (cplx y : candidates) {
    LatticeSummary cur;
    cur.window_center = y;
    cur.window_radius = l / 2;
    cur.l = l;
    for (const auto& im : lattice.images) {
      bool inside = true;
      for (const auto& v : im.boundary)
        if (std::abs(v - y) > l / 2) {
          inside = false;
          break;
        }
      if (inside) {
        cur.elements.push_back(im);
        cur.area_sum += im.area;
      }
    }
    cur.c_hat = cur.area_sum / (l * l);
    if (cur.c_hat > best.c_hat) best = cur;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Julia-set raster via the shadow rule of the level-m pair: apply eta
// on the right of the critical point, xi on the left, inside a proxy
// disk range of radius K_range * |I_H|.

struct Raster {
  std::size_t resolution = 0;
  std::size_t level = 0;
  int max_iter = 0;
  double half = 0;    // box is [-half, half]^2 centered at 0
  double k_range = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first; 255 bounded
  bool degenerate = false;           // everything escaped

  std::uint8_t at(std::size_t col, std::size_t row) const {
    return pixels[row * resolution + col];
  }
  double pixel_size() const { return 2 * half / static_cast<double>(resolution); }
};

inline Raster julia_raster(const map::CircleMap<double>& f, std::size_t m_level,
                           std::size_t resolution, int max_iter = 512,
                           double k_range = 2.0, std::size_t workers = 1) {
  if (resolution < 2 || resolution > 4096 ||
      (resolution & (resolution - 1)) != 0)
    throw error("parabolic.resolution",
                "resolution must be a power of two <= 4096");
  auto ds = map::detail::rotation_digits(f, m_level + 1);
  if (ds.digits.size() < m_level + 1)
    throw error("parabolic.rational_rotation",
                "rotation combinatorics end before the requested level");
  std::int64_t q_lo = 0, p_lo = 1, q_hi = 1, p_hi = 0;
  for (std::size_t k = 0; k < m_level; ++k) {
    std::int64_t qn = ds.digits[k] * q_hi + q_lo;
    std::int64_t pn = ds.digits[k] * p_hi + p_lo;
    q_lo = q_hi;
    p_lo = p_hi;
    q_hi = qn;
    p_hi = pn;
  }
  // level-m pair: eta = lift^{q_m} - p_m, xi = lift^{q_{m-1}} - p_{m-1}
  ComplexOrbitMap eta(f, q_hi, p_hi);
  ComplexOrbitMap xi(q_lo >= 1 ? ComplexOrbitMap(f, q_lo, p_lo)
                               : ComplexOrbitMap(f, 1, 0));
  const bool xi_is_translation = q_lo == 0;
  double eta0 = eta(cplx(0, 0)).real();
  double xi0 = xi_is_translation ? -1.0 : xi(cplx(0, 0)).real();
  double sgn = xi0 > 0 ? 1.0 : -1.0;
  eta0 *= sgn;
  xi0 *= sgn;
  if (!(eta0 < 0 && xi0 > 0))
    throw error("parabolic.pair_orientation", "degenerate return pair");

  Raster out;
  out.resolution = resolution;
  out.level = m_level;
  out.max_iter = max_iter;
  out.k_range = k_range;
  const double len = xi0 - eta0;
  out.half = 1.05 * std::max(-eta0, xi0);
  out.pixels.assign(resolution * resolution, 0);

  const cplx delta_center((eta0 + xi0) / 2, 0);
  const double delta_radius = k_range * len;
  const double step = 2 * out.half / static_cast<double>(resolution);

  auto apply = [&](cplx z) -> cplx {
    // own coordinates: s * raw(s * z)
    cplx raw = sgn * z;
    if (z.real() >= 0) return sgn * eta(raw);
    if (xi_is_translation) return z - sgn;  // raw xi is x -> x - 1
    return sgn * xi(raw);
  };

  auto run_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t row = row_begin; row < row_end; ++row) {
      double y = out.half - (static_cast<double>(row) + 0.5) * step;
      // the row touching the real axis is sampled on the axis itself,
      // so real-orbit invariance holds exactly at pixel level
      if (row == resolution / 2 - 1) y = 0.0;
      for (std::size_t col = 0; col < resolution; ++col) {
        double x = -out.half + (static_cast<double>(col) + 0.5) * step;
        cplx z(x, y);
        bool bounded = true;
        for (int it = 0; it < max_iter; ++it) {
          if (std::abs(z - delta_center) > delta_radius) {
            bounded = false;
            break;
          }
          z = apply(z);
        }
        if (bounded && std::abs(z - delta_center) > delta_radius)
          bounded = false;
        if (bounded) out.pixels[row * resolution + col] = 255;
      }
    }
  };

  // compute the upper half (plus nothing: rows < resolution/2 have y > 0)
  const std::size_t half_rows = resolution / 2;
  if (workers <= 1) {
    run_rows(0, half_rows);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (half_rows + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      std::size_t b = w * chunk, e = std::min(half_rows, b + chunk);
      if (b >= e) break;
      pool.emplace_back(run_rows, b, e);
    }
    for (auto& t : pool) t.join();
  }
  // conjugation symmetry is exact: mirror the upper half onto the lower
  for (std::size_t row = 0; row < half_rows; ++row) {
    std::size_t mrow = resolution - 1 - row;
    std::copy(out.pixels.begin() + static_cast<std::ptrdiff_t>(row * resolution),
              out.pixels.begin() +
                  static_cast<std::ptrdiff_t>((row + 1) * resolution),
              out.pixels.begin() + static_cast<std::ptrdiff_t>(mrow * resolution));
  }
  out.degenerate =
      std::all_of(out.pixels.begin(), out.pixels.end(),
                  [](std::uint8_t v) { return v == 0; });
  return out;
}

// ---------------------------------------------------------------------------
// Deep-point profile: s(r) = radius of the largest pixel disk inside
// B(0, r) avoiding the bounded set, via an exact Euclidean distance
// transform; beta = (log-log slope) - 1.

namespace detail {

// Felzenszwalb-Huttenlocher 1D squared distance transform.
inline void edt_1d(std::vector<double>& f, std::vector<double>& d,
                   std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -1e300;
  z[1] = 1e300;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = 1e300;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = (q - v[k]) * (q - v[k]) + f[v[k]];
  }
}

inline std::vector<double> distance_transform(const Raster& r) {
  const int n = static_cast<int>(r.resolution);
  std::vector<double> g(static_cast<std::size_t>(n) * n);
  for (int row = 0; row < n; ++row)
    for (int col = 0; col < n; ++col)
      g[static_cast<std::size_t>(row) * n + col] =
          r.pixels[static_cast<std::size_t>(row) * n + col] ? 0.0 : 1e300;
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int col = 0; col < n; ++col) {  // columns first
    for (int row = 0; row < n; ++row)
      f[row] = g[static_cast<std::size_t>(row) * n + col];
    edt_1d(f, d, v, z);
    for (int row = 0; row < n; ++row)
      g[static_cast<std::size_t>(row) * n + col] = d[row];
  }
  for (int row = 0; row < n; ++row) {  // then rows
    for (int col = 0; col < n; ++col)
      f[col] = g[static_cast<std::size_t>(row) * n + col];
    edt_1d(f, d, v, z);
    for (int col = 0; col < n; ++col)
      g[static_cast<std::size_t>(row) * n + col] = std::sqrt(d[col]);
  }
  return g;  // distance in pixels to the nearest bounded pixel
}

}  // namespace detail

struct DeepPointProfile {
  std::vector<double> r;
  std::vector<double> s;
  double slope = 0;
  double beta = 0;
  double r2 = 0;
};

inline DeepPointProfile deep_point_profile(const Raster& raster,
                                           const std::vector<double>& radii) {
  const double px = raster.pixel_size();
  const int n = static_cast<int>(raster.resolution);
  auto dist = detail::distance_transform(raster);

  DeepPointProfile out;
  for (double r : radii) {
    if (r / px < 8) continue;  // under the pixel floor
    if (r > raster.half) continue;
    double best = 0;
    const int pr = static_cast<int>(r / px) + 1;
    const int c = n / 2;
    for (int row = std::max(0, c - pr); row < std::min(n, c + pr); ++row) {
      for (int col = std::max(0, c - pr); col < std::min(n, c + pr); ++col) {
        double x = (-static_cast<double>(n) / 2 + col + 0.5) * px;
        double y = (static_cast<double>(n) / 2 - row - 0.5) * px;
        double rho = std::hypot(x, y);
        if (rho >= r) continue;
        double s = std::min(dist[static_cast<std::size_t>(row) * n + col] * px,
                            r - rho);
        best = std::max(best, s);
      }
    }
    if (best < 2 * px) continue;  // gap below the resolution floor
    out.r.push_back(r);
    out.s.push_back(best);
  }
  if (out.r.size() < 3)
    throw error("parabolic.profile", "fewer than 3 usable radii");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < out.r.size(); ++i) {
    lx.push_back(std::log(out.r[i]));
    ly.push_back(std::log(out.s[i]));
  }
  auto fit = fitting::linear_fit(lx, ly);
  out.slope = fit.slope;
  out.beta = fit.slope - 1;
  out.r2 = fit.r2;
  return out;
}

// ---------------------------------------------------------------------------
// Mode-locking tongue edge: the largest theta for which lift^q - p
// still has a real fixed point; there the cycle is a saddle-node with
// unit multiplier (the parabolic map of the experiments).

inline double tongue_edge(const map::MapFamily<double>& family, std::int64_t p,
                          std::int64_t q) {
  auto min_displacement = [&](double theta) {
    auto f = family.at(theta);
    double best = 1e300, best_x = 0;
    const int grid = 512;
    for (int i = 0; i < grid; ++i) {
      double x = static_cast<double>(i) / grid;
      double d = f.iterate(x, q, p) - x;
      if (d < best) {
        best = d;
        best_x = x;
      }
    }
    double lo = best_x - 1.0 / grid, hi = best_x + 1.0 / grid;
    for (int it = 0; it < 100; ++it) {
      double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (f.iterate(m1, q, p) - m1 < f.iterate(m2, q, p) - m2)
        hi = m2;
      else
        lo = m1;
    }
    double x = (lo + hi) / 2;
    return f.iterate(x, q, p) - x;
  };
  double lo = map::critical_cycle_parameter(family, p, q);
  if (min_displacement(lo) > 0)
    throw error("parabolic.tongue", "anchor not inside the locking interval");
  double width = 0.25 / static_cast<double>(q * q * q), hi = lo + width;
  while (min_displacement(hi) <= 0) {
    width *= 2;
    hi = lo + width;
    if (width > 1)
      throw error("parabolic.tongue", "no upper tongue edge found");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1 + std::abs(lo)); ++it) {
    double mid = lo + (hi - lo) / 2;
    if (min_displacement(mid) <= 0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace renormlab::para
