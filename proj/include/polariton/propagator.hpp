#pragma once
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "model.hpp"

namespace pol {

enum Comp { EE = 0, ES = 1, SE = 2, SS = 3 };

// Four amplitudes EE, ES, SE, SS on a uniform grid z = i h, z' = (i - j) h, stored as a band
// in the relative index j = (z - z')/h. ES has the photon at z and the spin wave at z'.
// Open mode keeps |j| <= band (cells with z' outside [0, L) stay zero); periodic mode keeps
// all j in [0, n) with both indices taken modulo n.
class TwoExcitationField {
 public:
  TwoExcitationField() = default;
  TwoExcitationField(int n, double h, int band, bool periodic = false) : n_(n), h_(h), periodic_(periodic) {
    if (n < 2 || !(h > 0)) throw ConfigError("grid needs n >= 2 and h > 0");
    if (periodic) {
      jmin_ = 0;
      m_ = n;
    } else {
      band = std::min(band, n - 1);
      if (band < 0) throw ConfigError("band must be non-negative");
      jmin_ = -band;
      m_ = 2 * band + 1;
    }
    for (auto& c : comp_) c.assign(static_cast<size_t>(n_) * m_, cplx(0));
  }

  int n() const { return n_; }
  double h() const { return h_; }
  double length() const { return n_ * h_; }
  int jmin() const { return jmin_; }
  int jmax() const { return jmin_ + m_ - 1; }
  int width() const { return m_; }
  bool periodic() const { return periodic_; }

  // false for open-mode cells whose z' lies outside the medium
  bool inside(int i, int j) const {
    if (periodic_) return true;
    const int ip = i - j;
    return ip >= 0 && ip < n_;
  }
  // |z - z'| in cells
  int distance(int j) const { return periodic_ ? std::min(j, n_ - j) : std::abs(j); }

  cplx& at(Comp c, int i, int j) { return comp_[c][idx(i, j)]; }
  cplx at(Comp c, int i, int j) const { return comp_[c][idx(i, j)]; }
  std::vector<cplx>& data(Comp c) { return comp_[c]; }
  const std::vector<cplx>& data(Comp c) const { return comp_[c]; }

  // amplitude at (z index, z' index); zero outside the band
  cplx value(Comp c, int i, int ip) const {
    int j = i - ip;
    if (periodic_) {
      i = mod(i);
      j = mod(j);
    } else if (i < 0 || i >= n_ || ip < 0 || ip >= n_ || j < jmin_ || j > jmax()) {
      return 0.0;
    }
    return at(c, i, j);
  }

  double norm2(Comp c) const {
    double s = 0;
    for (const auto& v : comp_[c]) s += std::norm(v);
    return s * h_ * h_;
  }
  double norm2() const { return norm2(EE) + norm2(ES) + norm2(SE) + norm2(SS); }

  void scale(double f) {
    for (auto& c : comp_)
      for (auto& v : c) v *= f;
  }

  int mod(int i) const { return ((i % n_) + n_) % n_; }

  double t = 0;
  double cut_norm = 0;   // weight removed by the relative-coordinate cutoff
  double exit_norm = 0;  // weight that left through the medium ends or was absorbed there

 private:
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * m_ + (j - jmin_); }

  int n_ = 0, m_ = 0, jmin_ = 0;
  double h_ = 0;
  bool periodic_ = false;
  std::array<std::vector<cplx>, 4> comp_;
};

struct EvolutionConfig {
  double tau = 0;            // time step; c tau must be a whole number of cells
  double t_final = 0;
  double zeta = 1;           // recorded; apply scale_params before building the propagator
  double cutoff_radius = 0;  // band half-width as a length; 0 keeps the full medium
  double absorb_width = 0;   // absorbing ramp at z = 0 and z = L (open mode)
  double absorb_rate = 0;    // peak rate of the ramp; 0 = 30 c / absorb_width
  double carrier_k = 0;      // center-of-mass carrier K0 factored out of the amplitudes
  double v_cap = 0;          // V(0) of the regularized C6/(r^6 + C6/v_cap); 0 = 1e4 * 2 Omega^2 / Delta
  std::vector<double> snapshot_times;
};

// z -> zeta z, g -> g / sqrt(zeta), r_b -> zeta r_b. The ratio v_g zeta / c must stay below
// (1 - K_bar)^2; ratios above a tenth of it only warn.
inline PolaritonParams scale_params(const PolaritonParams& p, double zeta, double k_bar) {
  if (!(zeta >= 1)) throw ConfigError("zeta must be >= 1");
  const double ratio = p.vg() * zeta / p.c, bound = (1 - k_bar) * (1 - k_bar);
  const std::string msg = "v_g zeta / c = " + std::to_string(ratio) + " vs (1 - K_bar)^2 = " + std::to_string(bound);
  if (!(ratio < bound)) throw ValidityError(msg);
  if (ratio > 0.1 * bound) warn(msg);
  PolaritonParams s = p;
  s.g = p.g / std::sqrt(zeta);
  s.c6 = p.c6 * std::pow(zeta, 6);
  return s;
}

// Strang splitting e^{-iW tau/2} e^{-iT tau} e^{-iW tau/2} with T an exact shift of s cells.
class Propagator {
 public:
  using Mat4 = Eigen::Matrix4cd;

  Propagator(const PolaritonParams& p, const EvolutionConfig& cfg, const TwoExcitationField& f)
      : p_(p), cfg_(cfg), n_(f.n()), h_(f.h()), periodic_(f.periodic()) {
    if (!(cfg.tau > 0)) throw ConfigError("time step must be positive");
    const double cells = p.c * cfg.tau / h_;
    shift_ = static_cast<int>(std::lround(cells));
    if (shift_ < 1 || std::abs(cells - shift_) > 1e-9 * std::max(1.0, cells))
      throw ConfigError("c*tau = " + std::to_string(cells) + " cells; must be a positive integer");
    const int dmax = periodic_ ? n_ / 2 : std::max(-f.jmin(), f.jmax());
    half_.resize(dmax + 1);
    full_.resize(dmax + 1);
    for (int d = 0; d <= dmax; ++d) {
      const Mat4 w = onsite(d * h_);
      half_[d] = (cplx(0, -0.5 * cfg.tau) * w).exp();
      full_[d] = half_[d] * half_[d];
    }
    if (cfg.absorb_width > 0 && !periodic_) {
      const double rate = cfg.absorb_rate > 0 ? cfg.absorb_rate : 30 * p.c / cfg.absorb_width;
      ramp_.resize(n_);
      const double len = n_ * h_;
      for (int i = 0; i < n_; ++i) {
        const double z = (i + 0.5) * h_;
        double u = 0;
        if (z < cfg.absorb_width) u = (cfg.absorb_width - z) / cfg.absorb_width;
        if (z > len - cfg.absorb_width) u = (z - len + cfg.absorb_width) / cfg.absorb_width;
        ramp_[i] = std::exp(-rate * cfg.tau * u * u);
      }
    }
  }

  int cells_per_step() const { return shift_; }

  // On-site generator at separation r.
  Mat4 onsite(double r) const {
    const cplx dt(p_.delta, -p_.gamma / 2);
    const double g = p_.g, om = p_.omega_c, ck = p_.c * cfg_.carrier_k;
    const double cap = cfg_.v_cap > 0 ? cfg_.v_cap : 1e4 * p_.light_shift();
    const double v = p_.c6 / (std::pow(r, 6) + p_.c6 / cap);  // smooth, equal to cap at r = 0
    const cplx x = -g * om / dt;
    const cplx ig(0, 1);
    Mat4 w = Mat4::Zero();
    w(EE, EE) = -2 * g * g / dt + ck;
    w(ES, ES) = w(SE, SE) = -(g * g + om * om) / dt - ig * p_.gamma_r / 2.0 + ck / 2;
    w(SS, SS) = -2 * om * om / dt + v - ig * p_.gamma_r;
    w(EE, ES) = w(ES, EE) = w(EE, SE) = w(SE, EE) = x;
    w(SS, ES) = w(ES, SS) = w(SS, SE) = w(SE, SS) = x;
    return w;
  }

  void apply_w(TwoExcitationField& f, bool half) const {
    const auto& u = half ? half_ : full_;
    const int m = f.width(), jmin = f.jmin();
    auto& ee = f.data(EE);
    auto& es = f.data(ES);
    auto& se = f.data(SE);
    auto& ss = f.data(SS);
#pragma omp parallel for
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < m; ++k) {
        const int j = jmin + k;
        if (!f.inside(i, j)) continue;
        const size_t a = static_cast<size_t>(i) * m + k;
        const Mat4& mat = u[f.distance(j)];
        const Eigen::Vector4cd v(ee[a], es[a], se[a], ss[a]);
        const Eigen::Vector4cd r = mat * v;
        ee[a] = r[0];
        es[a] = r[1];
        se[a] = r[2];
        ss[a] = r[3];
      }
    }
  }

  // Photon propagation: EE moves in z and z', ES in z, SE in z'.
  void apply_t(TwoExcitationField& f) const {
    const double before = f.norm2();
    double cut = 0;
    const int s = shift_, m = f.width(), jmin = f.jmin(), jmax = f.jmax();
    auto shifted = [&](Comp c, int di, int dj) {
      const auto& old = f.data(c);
      std::vector<cplx> out(old.size(), cplx(0));
      for (int i = 0; i < n_; ++i) {
        for (int k = 0; k < m; ++k) {
          const int j = jmin + k;
          int si = i - di, sj = j - dj;
          if (periodic_) {
            si = f.mod(si);
            sj = f.mod(sj);
          } else if (si < 0 || sj < jmin || sj > jmax || !f.inside(i, j)) {
            continue;
          }
          out[static_cast<size_t>(i) * m + k] = old[static_cast<size_t>(si) * m + (sj - jmin)];
        }
      }
      return out;
    };
    if (!periodic_) {
      // weight pushed past the band edge while staying inside the medium
      for (int i = 0; i < n_; ++i) {
        for (int k = 0; k < m; ++k) {
          const int j = jmin + k;
          if (j + s > jmax && i + s < n_) cut += std::norm(f.at(ES, i, j));
          if (j - s < jmin && i - j + s < n_) cut += std::norm(f.at(SE, i, j));
        }
      }
      cut *= h_ * h_;
    }
    f.data(EE) = shifted(EE, s, 0);
    f.data(ES) = shifted(ES, s, s);
    f.data(SE) = shifted(SE, 0, -s);
    if (!ramp_.empty()) {
      for (int i = 0; i < n_; ++i) {
        for (int k = 0; k < m; ++k) {
          const int ip = i - (jmin + k);
          if (ip < 0 || ip >= n_) continue;
          const double a = ramp_[i] * ramp_[ip];
          const size_t q = static_cast<size_t>(i) * m + k;
          for (int c = 0; c < 4; ++c) f.data(static_cast<Comp>(c))[q] *= a;
        }
      }
    }
    const double lost = before - f.norm2();
    f.cut_norm += cut;
    f.exit_norm += lost - cut;
  }

  void step(TwoExcitationField& f) const {
    apply_w(f, true);
    apply_t(f);
    apply_w(f, true);
    f.t += cfg_.tau;
  }

  // nsteps Strang steps with the inner W halves merged.
  void advance(TwoExcitationField& f, long nsteps) const {
    if (nsteps <= 0) return;
    apply_w(f, true);
    for (long k = 0; k < nsteps; ++k) {
      apply_t(f);
      apply_w(f, k + 1 == nsteps);
    }
    f.t += nsteps * cfg_.tau;
  }

  const EvolutionConfig& config() const { return cfg_; }

 private:
  PolaritonParams p_;
  EvolutionConfig cfg_;
  int n_ = 0;
  double h_ = 0;
  bool periodic_ = false;
  int shift_ = 1;
  std::vector<Mat4> half_, full_;
  std::vector<double> ramp_;
};

// Removes everything with |z - z'| > radius and returns the removed weight.
inline double apply_cutoff(TwoExcitationField& f, double radius) {
  double removed = 0;
  for (int i = 0; i < f.n(); ++i)
    for (int j = f.jmin(); j <= f.jmax(); ++j) {
      if (f.distance(j) * f.h() <= radius * (1 + 1e-12)) continue;
      for (int c = 0; c < 4; ++c) {
        cplx& v = f.at(static_cast<Comp>(c), i, j);
        removed += std::norm(v);
        v = 0;
      }
    }
  removed *= f.h() * f.h();
  f.cut_norm += removed;
  return removed;
}

// Steps from f.t to each requested time in order (rounded to whole steps) and calls the observer there.
inline void evolve(TwoExcitationField& f, const Propagator& prop, const std::vector<double>& times,
                   const std::function<void(const TwoExcitationField&)>& observer) {
  const double tau = prop.config().tau;
  for (double t : times) {
    const long target = std::lround(t / tau), now = std::lround(f.t / tau);
    prop.advance(f, target - now);
    f.t = target * tau;
    if (observer) observer(f);
  }
}

// Band half-width in cells for a cutoff radius.
inline int band_cells(double cutoff_radius, double h, int n) {
  if (!(cutoff_radius > 0)) return n - 1;
  return std::min(n - 1, static_cast<int>(std::floor(cutoff_radius / h + 1e-9)));
}

}  // namespace pol
